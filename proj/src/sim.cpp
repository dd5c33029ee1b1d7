#include "liver/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace liver {

std::string to_string(Role r) {
    switch (r) {
    case Role::MpInitiator: return "mp-initiator";
    case Role::MpReceiver: return "mp-receiver";
    case Role::Forwarder: return "forwarder";
    }
    return "?";
}

std::vector<NodeId> Topology::node_ids() const {
    std::vector<NodeId> ids(positions.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<NodeId>(i);
    return ids;
}

double Topology::distance(NodeId a, NodeId b) const {
    return std::hypot(positions.at(a).x - positions.at(b).x, positions.at(a).y - positions.at(b).y);
}

Scenario Scenario::es1() {
    Scenario s;
    s.name = "es1";
    s.width_m = 2000;
    s.height_m = 2000;
    s.inter_mp_m = 50;
    s.mp_count = 40;
    s.fn_count = 20;
    return s;
}

Scenario Scenario::es2() {
    Scenario s;
    s.name = "es2";
    s.width_m = 1000;
    s.height_m = 1000;
    s.inter_mp_m = 75;
    s.mp_count = 40;
    s.fn_count = 20;
    return s;
}

Scenario Scenario::named(const std::string& name) {
    if (name == "es1" || name == "ES-1") return es1();
    if (name == "es2" || name == "ES-2") return es2();
    if (name == "custom") return Scenario{};
    throw Error("unknown scenario '" + name + "' (expected es1, es2 or custom)");
}

int Scenario::sites_per_road() const {
    if (!(inter_mp_m > 0)) return 0;
    return static_cast<int>(std::floor(width_m / inter_mp_m));
}

void Scenario::validate() const {
    if (!(width_m > 0 && height_m > 0)) throw Error("scenario area must be positive");
    if (!(inter_mp_m > 0)) throw Error("inter_mp distance must be > 0");
    if (!(mp_separation_m > 0)) throw Error("MP separation must be > 0");
    if (mp_count < 1) throw Error("scenario has no measurement points");
    if (fn_count < 0) throw Error("fn_count must be >= 0");
    if (!fn_positions.empty() && fn_positions.size() != static_cast<std::size_t>(fn_count))
        throw Error("fn_positions must list exactly fn_count points");
    if (fn_offset_m < 0) throw Error("fn_offset must be >= 0");
    if (sites_per_road() < 1) throw Error("area too narrow for a single MP at the given spacing");
    if (mp_separation_m >= inter_mp_m) throw Error("MP separation must be below the inter-MP distance");
}

Topology make_grid(const Scenario& s) {
    s.validate();
    const int per_road = s.sites_per_road();
    const int roads = (s.mp_count + per_road - 1) / per_road;
    const double x0 = 0.5 * (s.width_m - (per_road - 1) * s.inter_mp_m);
    const double half = 0.5 * s.mp_separation_m;

    Topology topo;
    for (int r = 0; r < roads; ++r) {
        const double y = 0.5 * s.height_m + (r - 0.5 * (roads - 1)) * s.inter_mp_m;
        if (y - half < 0 || y + half > s.height_m) throw Error("roads do not fit in the scenario area");
        topo.roads.push_back(y);
    }

    auto site = [&](int k) {
        const int r = k / per_road;
        int i = k % per_road;
        if (r % 2 == 1) i = per_road - 1 - i;
        return Point{x0 + i * s.inter_mp_m, topo.roads[static_cast<std::size_t>(r)]};
    };

    for (int k = 0; k < s.mp_count; ++k) {
        const Point c = site(k);
        MpSite mp;
        mp.index = static_cast<std::size_t>(k);
        mp.initiator = static_cast<NodeId>(topo.positions.size());
        mp.receiver = mp.initiator + 1;
        mp.crossing = c;
        mp.row = static_cast<std::size_t>(k / per_road);
        topo.positions.push_back({c.x, c.y - half});
        topo.roles.push_back(Role::MpInitiator);
        topo.positions.push_back({c.x, c.y + half});
        topo.roles.push_back(Role::MpReceiver);
        topo.mps.push_back(mp);
    }
    if (!s.fn_positions.empty()) {
        for (const auto& p : s.fn_positions) {
            if (p.x < 0 || p.x > s.width_m || p.y < 0 || p.y > s.height_m)
                throw Error("forwarder position outside the scenario area");
            topo.forwarders.push_back(static_cast<NodeId>(topo.positions.size()));
            topo.positions.push_back(p);
            topo.roles.push_back(Role::Forwarder);
        }
        return topo;
    }
    if (s.fn_count > s.mp_count) throw Error("more forwarders than MPs to anchor them to");
    for (int j = 0; j < s.fn_count; ++j) {
        const int anchor = static_cast<int>((2 * j + 1) * static_cast<std::int64_t>(s.mp_count) / (2 * s.fn_count));
        const Point c = site(anchor);
        const double out = half + s.fn_offset_m;
        const Point p{c.x, c.y + (j % 2 == 0 ? -out : out)};
        if (p.y < 0 || p.y > s.height_m) throw Error("forwarder " + std::to_string(j) + " falls outside the area");
        topo.forwarders.push_back(static_cast<NodeId>(topo.positions.size()));
        topo.positions.push_back(p);
        topo.roles.push_back(Role::Forwarder);
    }
    return topo;
}

RadioChannel::RadioChannel(const Topology& topology, LinkModel model, double obstruction_radius_m)
    : n_(topology.size()), dist_(n_ * n_, 0.0), affects_(n_ * n_), logs_(topology.mps.size(), nullptr),
      model_(std::move(model)), cutoff_dbm_(model_.calibration().noise_floor_dbm - 15.0) {
    if (obstruction_radius_m < 0) throw Error("obstruction radius must be >= 0");
    const auto& pos = topology.positions;
    for (std::size_t a = 0; a < n_; ++a) {
        for (std::size_t b = a + 1; b < n_; ++b) {
            const double d = std::hypot(pos[a].x - pos[b].x, pos[a].y - pos[b].y);
            dist_[a * n_ + b] = dist_[b * n_ + a] = d;
            std::vector<std::uint32_t> hit;
            for (const auto& mp : topology.mps) {
                const double y = topology.roads[mp.row];
                const double da = pos[a].y - y;
                const double db = pos[b].y - y;
                if (!(da * db < 0)) continue;
                const double x = pos[a].x + (y - pos[a].y) * (pos[b].x - pos[a].x) / (pos[b].y - pos[a].y);
                if (std::abs(x - mp.crossing.x) <= obstruction_radius_m) hit.push_back(static_cast<std::uint32_t>(mp.index));
            }
            affects_[a * n_ + b] = hit;
            affects_[b * n_ + a] = std::move(hit);
        }
    }
}

void RadioChannel::set_traffic(std::size_t mp, const GroundTruthLog* log) { logs_.at(mp) = log; }

const std::vector<std::uint32_t>& RadioChannel::obstructing_mps(NodeId a, NodeId b) const {
    return affects_.at(static_cast<std::size_t>(a) * n_ + b);
}

std::optional<double> RadioChannel::link_power(NodeId tx, NodeId rx, int txp, Micros t) const {
    if (tx >= n_ || rx >= n_ || tx == rx) return std::nullopt;
    const std::size_t idx = static_cast<std::size_t>(tx) * n_ + rx;
    std::vector<Obstruction> obs;
    for (std::uint32_t m : affects_[idx]) {
        const GroundTruthLog* log = logs_[m];
        if (!log) continue;
        for (std::size_t i : log->intersecting(t, t + 1)) obs.push_back({log->vehicles()[i].size, 1.0});
    }
    const double p = model_.received_power(txp, dist_[idx], obs);
    if (p < cutoff_dbm_) return std::nullopt;
    return p;
}

std::optional<Capture> RadioChannel::decode(std::span<const Signal> concurrent, Rng& rng) const {
    return model_.capture_resolve(concurrent, rng);
}

double RadioChannel::link_prr(NodeId a, NodeId b, int txp) const {
    return model_.prr(model_.received_power(txp, dist_.at(static_cast<std::size_t>(a) * n_ + b)));
}

std::vector<int> connectivity_hops(const Topology& topology, const RadioChannel& channel, int txp, NodeId source,
                                   double threshold) {
    const std::size_t n = topology.size();
    std::vector<int> hops(n, -1);
    if (source >= n) throw Error("source node out of range");
    std::deque<NodeId> queue{source};
    hops[source] = 0;
    while (!queue.empty()) {
        const NodeId u = queue.front();
        queue.pop_front();
        for (NodeId v = 0; v < n; ++v) {
            if (hops[v] >= 0 || v == u) continue;
            if (channel.link_prr(u, v, txp) >= threshold) {
                hops[v] = hops[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return hops;
}

void DcSettings::validate() const {
    if (slot <= 0) throw Error("measurement slot must be > 0");
    if (timeout_slots < 1) throw Error("measurement timeout must be >= 1 slot");
    if (split_ntx < 1 || pg_ntx < 1) throw Error("measurement ntx must be >= 1");
}

GlossyConfig DcSettings::instance_config(const PhaseSchedule& s) const {
    GlossyConfig c;
    const bool pg = s.strategy == Strategy::PG;
    c.ntx = pg ? pg_ntx : split_ntx;
    c.persistent = pg ? pg_persistent : true;
    c.slot_duration = slot;
    c.initiator_timeout = timeout_slots * slot;
    c.max_duration = s.t_dc;
    c.txp = s.txp_dc;
    c.validate();
    return c;
}

std::string to_string(Granularity g) { return g == Granularity::Window ? "window" : "instance"; }

Granularity parse_granularity(const std::string& s) {
    if (s == "window") return Granularity::Window;
    if (s == "instance") return Granularity::Instance;
    throw Error("unknown granularity '" + s + "' (expected window or instance)");
}

std::string to_string(LabelScope s) { return s == LabelScope::Probe ? "probe" : "period"; }

LabelScope parse_label_scope(const std::string& s) {
    if (s == "probe") return LabelScope::Probe;
    if (s == "period") return LabelScope::Period;
    throw Error("unknown label scope '" + s + "' (expected probe or period)");
}

bool disturbance(const GlossyRunResult& result, NodeId receiver) {
    return result.at(result.initiator).initiator_timeout_count > 1 || result.at(receiver).rx_count < result.ntx;
}

namespace {

void append_rows(std::vector<FeatureVector>& rows, std::span<const GlossyRunResult> results,
                 std::span<const Interval> probes, NodeId receiver, std::int64_t period, Micros gp,
                 const GroundTruthLog& truth, const SessionOptions& options) {
    const auto label = [&](std::span<const Interval> iv) {
        return options.label_scope == LabelScope::Probe
                   ? label_intervals(truth, iv, LabelMode::SevenClass)
                   : label_window(truth, period * gp, (period + 1) * gp, LabelMode::SevenClass);
    };
    if (options.granularity == Granularity::Window) {
        auto fv = extract_window(results, receiver);
        fv.period = period;
        fv.label = label(probes);
        rows.push_back(fv);
        return;
    }
    for (std::size_t i = 0; i < results.size(); ++i) {
        auto fv = extract_window(results.subspan(i, 1), receiver);
        fv.period = period;
        fv.label = label(probes.subspan(i, 1));
        rows.push_back(fv);
    }
}

Interval probe_of(const GlossyRunResult& r) { return {r.start_time, std::max(r.end_time, r.start_time + 1)}; }

} // namespace

MpSessionResult run_mp_session(const PhaseSchedule& schedule, const DcSettings& dc, const ChannelOracle& channel,
                               NodeId initiator, NodeId receiver, std::size_t stream, std::int64_t periods,
                               std::uint64_t seed, const GroundTruthLog& truth, const SessionOptions& options) {
    dc.validate();
    const GlossyConfig cfg = dc.instance_config(schedule);
    const std::array<NodeId, 2> pair{initiator, receiver};
    MpSessionResult out;
    out.disturbed.assign(static_cast<std::size_t>(std::max<std::int64_t>(periods, 0)), false);

    for (std::int64_t p = 0; p < periods; ++p) {
        Rng rng(derive_seed(seed, stream::kMeasure, stream, static_cast<std::uint64_t>(p)));
        std::vector<Micros> starts;
        for (const auto& w : build_timeline(schedule, p))
            if (w.phase == PhaseTag::DC) starts.push_back(w.start);

        std::vector<GlossyRunResult> results;
        std::vector<Interval> probes;
        bool compressed = false;
        for (std::size_t i = 0; i < starts.size(); ++i) {
            auto res = run_flood(pair, initiator, cfg, channel, starts[i], rng);
            out.windows.push_back({starts[i], starts[i] + schedule.t_dc});
            probes.push_back(probe_of(res));
            const bool hit = disturbance(res, receiver);
            if (hit) out.disturbed[static_cast<std::size_t>(p)] = true;
            if (schedule.strategy == Strategy::DMPG && hit && !compressed && i + 1 < starts.size()) {
                const auto plan = reschedule_dmpg(schedule, static_cast<int>(starts.size() - i - 1), res.end_time);
                starts.resize(i + 1);
                starts.insert(starts.end(), plan.starts.begin(), plan.starts.end());
                out.dropped += plan.dropped;
                out.compressions += 1;
                compressed = true;
            }
            results.push_back(std::move(res));
        }

        if (options.keep_trace)
            for (std::size_t i = 0; i < results.size(); ++i)
                out.trace.push_back(to_trace_row(results[i], receiver, p, results.front().start_time, static_cast<int>(i), 0));
        append_rows(out.rows, results, probes, receiver, p, schedule.gp, truth, options);
    }
    return out;
}

std::vector<FeatureVector> replay_trace(std::span<const TraceRow> trace, const GroundTruthLog& truth, Micros gp,
                                        const SessionOptions& options) {
    if (gp <= 0) throw Error("replay needs a positive period length");
    std::vector<FeatureVector> rows;
    std::vector<GlossyRunResult> results;
    std::vector<Interval> probes;
    const auto flush = [&](std::int64_t period) {
        if (results.empty()) return;
        append_rows(rows, results, probes, 1, period, gp, truth, options);
        results.clear();
        probes.clear();
    };
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto& t = trace[i];
        if (i > 0 && (t.period != trace[i - 1].period || t.window_start != trace[i - 1].window_start))
            flush(trace[i - 1].period);
        results.push_back(from_trace_row(t));
        probes.push_back(probe_of(results.back()));
    }
    if (!trace.empty()) flush(trace.back().period);
    return rows;
}

CoverageStats coverage(const GroundTruthLog& truth, std::span<const Interval> windows, Micros horizon) {
    CoverageStats st;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const Micros a = truth.vehicles()[i].arrival;
        const Micros b = a + truth.contact(i);
        if (a < 0 || b > horizon) continue;
        ++st.vehicles;
        auto it = std::upper_bound(windows.begin(), windows.end(), a,
                                   [](Micros t, const Interval& w) { return t < w.end; });
        if (it != windows.end() && it->begin < b) ++st.covered;
    }
    return st;
}

GlossyConfig ScSettings::config(const PhaseSchedule& s) const {
    GlossyConfig c;
    c.ntx = ntx;
    c.slot_duration = slot;
    c.initiator_timeout = timeout_slots * slot;
    c.max_duration = s.t_sc;
    c.txp = s.txp_sc;
    c.persistent = false;
    return c;
}

void ExperimentConfig::validate() const {
    scenario.validate();
    schedule.check();
    if (schedule.strategy != Strategy::PG) {
        const auto report = ::liver::validate(schedule);
        if (!report.ok()) throw Error("schedule violates timing constraints:\n" + report.to_text());
    }
    dc.validate();
    dc.instance_config(schedule);
    sc.config(schedule).validate();
    if (iphase) chaos.validate();
    traffic.config.validate();
    if (traffic.enabled && !(traffic.mean_headway_s > 0)) throw Error("mean_headway must be > 0");
    calibration.validate();
    obstruction.validate();
    if (periods < 1) throw Error("periods must be >= 1");
    if (sc_initiator >= static_cast<NodeId>(scenario.node_count())) throw Error("sync initiator is not a node");
}

namespace {

double mean_of(const std::vector<ScPeriodRow>& rows, double ScPeriodRow::*field) {
    if (rows.empty()) return 0;
    double s = 0;
    for (const auto& r : rows) s += r.*field;
    return s / static_cast<double>(rows.size());
}

} // namespace

double ExperimentRecord::mean_sc_lt() const { return mean_of(sc, &ScPeriodRow::mean_lt_us); }
double ExperimentRecord::mean_sc_ro() const { return mean_of(sc, &ScPeriodRow::mean_ro_us); }
double ExperimentRecord::mean_sc_hc() const { return mean_of(sc, &ScPeriodRow::mean_hc); }
double ExperimentRecord::mean_sc_rxct() const { return mean_of(sc, &ScPeriodRow::mean_rxct); }

double ExperimentRecord::mean_iphase_latency() const {
    if (iphase.empty()) return 0;
    double s = 0;
    for (const auto& r : iphase) s += r.mean_latency_us;
    return s / static_cast<double>(iphase.size());
}

ExperimentRecord run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto& sched = config.schedule;
    ExperimentRecord rec;
    rec.topology = make_grid(config.scenario);
    const auto& topo = rec.topology;
    RadioChannel channel(topo, LinkModel(config.calibration, config.obstruction), config.obstruction_radius_m);

    const auto hops = connectivity_hops(topo, channel, sched.txp_sc, config.sc_initiator);
    for (std::size_t i = 0; i < hops.size(); ++i)
        if (hops[i] < 0)
            throw Error("topology is disconnected at txp_sc " + std::to_string(sched.txp_sc) + ": node " +
                        std::to_string(i) + " is unreachable from node " + std::to_string(config.sc_initiator));

    const Micros horizon = config.periods * sched.gp;
    rec.mps.resize(topo.mps.size());
    for (std::size_t m = 0; m < topo.mps.size(); ++m) {
        auto& mr = rec.mps[m];
        mr.site = topo.mps[m];
        if (config.traffic.enabled) {
            Rng rng(derive_seed(config.seed, stream::kTraffic, m));
            mr.truth = generate_traffic(to_seconds(horizon), config.traffic.mean_headway_s, config.traffic.class_mix,
                                        rng, config.traffic.config);
        } else {
            mr.truth = GroundTruthLog({}, config.traffic.mean_headway_s, config.traffic.config.corridor_width_m);
        }
        channel.set_traffic(m, &mr.truth);
    }

    // Measurement phases only touch their own MP link, so each MP can be run
    // over all periods at once.
    for (auto& mr : rec.mps) {
        mr.session = run_mp_session(sched, config.dc, channel, mr.site.initiator, mr.site.receiver, mr.site.index,
                                    config.periods, config.seed, mr.truth, config.session);
        mr.coverage = coverage(mr.truth, mr.session.windows, horizon);
    }

    const auto ids = topo.node_ids();
    rec.nodes.resize(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        rec.nodes[i].id = ids[i];
        rec.nodes[i].role = topo.roles[i];
    }
    const GlossyConfig sc_cfg = config.sc.config(sched);
    for (std::int64_t p = 0; p < config.periods; ++p) {
        Rng rng(derive_seed(config.seed, stream::kSync, static_cast<std::uint64_t>(p)));
        const auto res = run_flood(ids, config.sc_initiator, sc_cfg, channel, p * sched.gp, rng);
        ScPeriodRow row;
        row.period = p;
        std::size_t counted = 0;
        std::size_t reached = 0;
        std::size_t with_hc = 0;
        for (std::size_t i = 0; i < res.nodes.size(); ++i) {
            const auto& o = res.nodes[i];
            auto& ns = rec.nodes[i];
            ns.floods += 1;
            ns.ro.add(static_cast<double>(o.radio_on));
            ns.rxct.add(o.rx_count);
            if (o.id == config.sc_initiator) continue;
            ++counted;
            const double lt = static_cast<double>(o.latency.value_or(res.max_duration));
            ns.lt.add(lt);
            row.mean_lt_us += lt;
            row.mean_ro_us += static_cast<double>(o.radio_on);
            row.mean_rxct += o.rx_count;
            if (o.received) {
                ++reached;
                ns.received += 1;
                ns.hc.add(*o.first_rx_relay_count);
                row.mean_hc += *o.first_rx_relay_count;
                ++with_hc;
            }
        }
        if (counted) {
            row.reached = static_cast<double>(reached) / static_cast<double>(counted);
            row.mean_lt_us /= static_cast<double>(counted);
            row.mean_ro_us /= static_cast<double>(counted);
            row.mean_rxct /= static_cast<double>(counted);
        } else {
            row.reached = 1.0;
        }
        if (with_hc) row.mean_hc /= static_cast<double>(with_hc);
        rec.sc.push_back(row);
    }

    if (config.iphase) {
        for (std::int64_t p = 0; p < config.periods; ++p) {
            const Micros period_begin = p * sched.gp;
            Micros last_end = period_begin + sched.t_sc;
            std::vector<Contribution> contrib;
            for (const auto& mr : rec.mps) {
                for (const auto& w : mr.session.windows)
                    if (w.begin >= period_begin && w.begin < period_begin + sched.gp) last_end = std::max(last_end, w.end);
                contrib.push_back({mr.site.initiator, mr.site.index, mr.session.disturbed[static_cast<std::size_t>(p)]});
            }
            Rng rng(derive_seed(config.seed, stream::kShare, static_cast<std::uint64_t>(p)));
            const auto res = run_chaos_share(ids, contrib, rec.mps.size(), config.chaos, channel,
                                             last_end + sched.t_scdc_gap, rng);
            IPhaseRow row;
            row.period = p;
            row.complete = res.all_complete;
            for (const auto& c : contrib) row.flags_set += c.value ? 1 : 0;
            for (const auto& o : res.nodes) {
                const double lat = static_cast<double>(o.latency.value_or(config.chaos.max_duration));
                row.mean_latency_us += lat;
                row.max_latency_us = std::max(row.max_latency_us, lat);
                row.mean_radio_on_us += static_cast<double>(o.radio_on);
            }
            row.mean_latency_us /= static_cast<double>(res.nodes.size());
            row.mean_radio_on_us /= static_cast<double>(res.nodes.size());
            rec.iphase.push_back(row);
        }
    }
    return rec;
}

} // namespace liver
