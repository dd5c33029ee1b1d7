#include "liver/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "liver/csv.hpp"

namespace liver {

namespace {

constexpr std::uint64_t kSplitTag = 0x73706c6974ULL;

bool is_integral(double v) { return std::isfinite(v) && std::floor(v) == v; }

} // namespace

const std::vector<std::string>& sweep_metric_names(SweepAxis axis) {
    static const std::vector<std::string> txp{"r", "r_sd", "windows"};
    static const std::vector<std::string> headway{"accuracy", "mean_class_accuracy", "windows", "test_size"};
    static const std::vector<std::string> local{"accuracy", "mean_class_accuracy", "coverage",
                                                "compressions", "dropped", "windows"};
    static const std::vector<std::string> wide{"lt_us", "ro_us", "hc", "rxct", "reached", "iphase_latency_us",
                                               "iphase_complete"};
    switch (axis) {
    case SweepAxis::Txp: return txp;
    case SweepAxis::Headway: return headway;
    case SweepAxis::Gp:
    case SweepAxis::Strategy: return local;
    case SweepAxis::MpCount:
    case SweepAxis::FnCount: return wide;
    }
    return wide;
}

namespace {

struct Unit {
    std::size_t value_index = 0; ///< unused for the headway axis
    std::size_t seed_index = 0;
};

struct UnitOutput {
    std::vector<std::pair<std::size_t, SweepRecord>> records; ///< (group order, record)
    std::vector<PointData> data;
};

std::vector<double> axis_values(const SweepSpec& spec) {
    if (spec.axis != SweepAxis::Strategy) return spec.values;
    std::vector<double> v;
    for (auto s : spec.strategies) v.push_back(static_cast<double>(static_cast<int>(s)));
    return v;
}

PointData point_data(const std::string& tag, const ExperimentRecord& rec) {
    PointData d;
    d.tag = tag;
    d.features = collect_rows(rec);
    for (const auto& mp : rec.mps) {
        d.traces.push_back(mp.session.trace);
        d.truths.push_back(mp.truth);
    }
    return d;
}

std::string tag_of(SweepAxis axis, double value, std::uint64_t seed) {
    return to_string(axis) + "_" + format_value(axis, value) + "_seed" + std::to_string(seed);
}

UnitOutput run_txp(const RunConfig& rc, double value, std::uint64_t seed) {
    TxpSweepConfig t;
    t.txp_min = t.txp_max = static_cast<int>(value);
    t.windows = rc.txp.windows;
    t.flood = rc.txp.flood;
    t.spacing = rc.txp.spacing;
    t.traffic = rc.experiment.traffic;
    t.calibration = rc.experiment.calibration;
    t.obstruction = rc.experiment.obstruction;
    t.seed = seed;
    UnitOutput out;
    for (std::size_t g = 0; g < rc.txp.settings.size(); ++g) {
        RunningStats st;
        for (const auto& s : txp_sweep(t, rc.txp.settings[g])) st.add(s.r);
        SweepRecord r{format_value(SweepAxis::Txp, value), to_string(rc.txp.settings[g]), seed,
                      {st.mean(), st.stddev(), static_cast<double>(st.count())}};
        out.records.emplace_back(g, std::move(r));
    }
    return out;
}

UnitOutput run_local(const RunConfig& rc, double value, std::uint64_t seed) {
    const auto cfg = point_config(rc, value, seed);
    auto rec = run_experiment(cfg);
    const auto rows = collect_rows(rec);
    const auto& c = rc.classifier;
    const auto res = train_and_evaluate(rows, c.view, c.svm, c.features, c.train_fraction,
                                        derive_seed(seed, kSplitTag), c.scoring);
    CoverageStats cov;
    double compressions = 0;
    double dropped = 0;
    for (const auto& mp : rec.mps) {
        cov.vehicles += mp.coverage.vehicles;
        cov.covered += mp.coverage.covered;
        compressions += mp.session.compressions;
        dropped += mp.session.dropped;
    }
    UnitOutput out;
    out.records.emplace_back(0, SweepRecord{format_value(rc.sweep.axis, value), "", seed,
                                            {res.confusion.overall_accuracy(), res.confusion.mean_accuracy(),
                                             cov.fraction(), compressions, dropped,
                                             static_cast<double>(rows.size())}});
    if (rc.emit_data) out.data.push_back(point_data(tag_of(rc.sweep.axis, value, seed), rec));
    return out;
}

UnitOutput run_wide(const RunConfig& rc, double value, std::uint64_t seed) {
    const auto cfg = point_config(rc, value, seed);
    auto rec = run_experiment(cfg);
    double reached = 0;
    for (const auto& r : rec.sc) reached += r.reached;
    reached /= static_cast<double>(std::max<std::size_t>(rec.sc.size(), 1));
    double complete = 0;
    for (const auto& r : rec.iphase) complete += r.complete ? 1.0 : 0.0;
    if (!rec.iphase.empty()) complete /= static_cast<double>(rec.iphase.size());
    UnitOutput out;
    out.records.emplace_back(0, SweepRecord{format_value(rc.sweep.axis, value), "", seed,
                                            {rec.mean_sc_lt(), rec.mean_sc_ro(), rec.mean_sc_hc(), rec.mean_sc_rxct(),
                                             reached, rec.mean_iphase_latency(), complete}});
    if (rc.emit_data) out.data.push_back(point_data(tag_of(rc.sweep.axis, value, seed), rec));
    return out;
}

UnitOutput run_headway(const RunConfig& rc, std::uint64_t seed) {
    ExperimentConfig base = rc.experiment;
    base.seed = seed;
    const auto& c = rc.classifier;
    const auto points = headway_sweep(base, rc.sweep.values, c.svm, c.features, c.train_fraction, c.scoring);
    UnitOutput out;
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto& p = points[k];
        out.records.emplace_back(k, SweepRecord{format_value(SweepAxis::Headway, p.headway_s), "", seed,
                                                {p.accuracy, p.mean_class_accuracy, static_cast<double>(p.windows),
                                                 static_cast<double>(p.test_size)}});
    }
    return out;
}

} // namespace

std::string to_string(SweepAxis a) {
    switch (a) {
    case SweepAxis::Txp: return "txp";
    case SweepAxis::Headway: return "headway";
    case SweepAxis::Gp: return "gp";
    case SweepAxis::Strategy: return "strategy";
    case SweepAxis::MpCount: return "mp_count";
    case SweepAxis::FnCount: return "fn_count";
    }
    return "?";
}

SweepAxis parse_sweep_axis(const std::string& s) {
    for (auto a : {SweepAxis::Txp, SweepAxis::Headway, SweepAxis::Gp, SweepAxis::Strategy, SweepAxis::MpCount,
                   SweepAxis::FnCount})
        if (to_string(a) == s) return a;
    throw Error("unknown sweep axis '" + s + "' (expected txp, headway, gp, strategy, mp_count or fn_count)");
}

void ClassifierConfig::validate() const {
    svm.validate();
    if (features.empty()) throw Error("classifier needs at least one feature");
    const auto& known = feature_names();
    for (const auto& f : features)
        if (std::find(known.begin(), known.end(), f) == known.end()) throw Error("unknown feature '" + f + "'");
    if (!(train_fraction > 0 && train_fraction < 1)) throw Error("train_fraction must lie in (0, 1)");
}

std::string format_value(SweepAxis axis, double v) {
    switch (axis) {
    case SweepAxis::Txp:
    case SweepAxis::MpCount:
    case SweepAxis::FnCount: return std::to_string(static_cast<long long>(v));
    case SweepAxis::Strategy: return to_string(static_cast<Strategy>(static_cast<int>(v)));
    default: return csv::format(v);
    }
}

ExperimentConfig point_config(const RunConfig& rc, double value, std::uint64_t seed) {
    ExperimentConfig cfg = rc.experiment;
    cfg.seed = seed;
    switch (rc.sweep.axis) {
    case SweepAxis::Txp: break;
    case SweepAxis::Headway: cfg.traffic.mean_headway_s = value; break;
    case SweepAxis::Gp:
        cfg.schedule.gp = from_seconds(value);
        cfg.schedule.t_sc_gap = cfg.schedule.gp - cfg.schedule.t_sc;
        break;
    case SweepAxis::Strategy: cfg.schedule.strategy = static_cast<Strategy>(static_cast<int>(value)); break;
    case SweepAxis::MpCount: cfg.scenario.mp_count = static_cast<int>(value); break;
    case SweepAxis::FnCount: cfg.scenario.fn_count = static_cast<int>(value); break;
    }
    return cfg;
}

void RunConfig::validate() const {
    if (preset != "roadside" && preset != "wide-area")
        throw Error("unknown preset '" + preset + "' (expected roadside or wide-area)");
    experiment.validate();
    classifier.validate();
    if (seeds.empty()) throw Error("at least one seed is required");
    if (output_dir.empty()) throw Error("output directory must not be empty");

    const auto& s = sweep;
    if (s.axis == SweepAxis::Strategy) {
        if (s.strategies.empty()) throw Error("strategy sweep needs at least one strategy");
    } else if (s.values.empty()) {
        throw Error(to_string(s.axis) + " sweep needs at least one value");
    }
    for (double v : s.values) {
        const std::string at = to_string(s.axis) + " value " + csv::format(v);
        switch (s.axis) {
        case SweepAxis::Txp:
            if (!is_integral(v) || v < kMinTxp || v > kMaxTxp) throw Error(at + " must be an integer in [0, 31]");
            break;
        case SweepAxis::Headway:
            if (!(v > 0)) throw Error(at + " must be > 0");
            break;
        case SweepAxis::Gp:
            if (!(v > 0)) throw Error(at + " must be > 0");
            break;
        case SweepAxis::MpCount:
            if (!is_integral(v) || v < 1) throw Error(at + " must be an integer >= 1");
            break;
        case SweepAxis::FnCount:
            if (!is_integral(v) || v < 0) throw Error(at + " must be an integer >= 0");
            break;
        case SweepAxis::Strategy: break;
        }
    }
    if (s.axis == SweepAxis::Txp) {
        if (txp.windows < 1) throw Error("txp study needs at least one window per level");
        if (txp.settings.empty()) throw Error("txp study needs at least one road setting");
        GlossyConfig g = txp.flood;
        g.validate();
        if (txp.spacing < g.max_duration) throw Error("txp study window spacing shorter than one flood");
        return;
    }
    for (double v : axis_values(s)) {
        try {
            point_config(*this, v, seeds.front()).validate();
        } catch (const Error& e) {
            throw Error(to_string(s.axis) + " point " + format_value(s.axis, v) + ": " + e.what());
        }
    }
}

SweepResult run_sweep(const RunConfig& rc, int jobs, const std::function<void(const SweepRecord&)>& on_point) {
    rc.validate();
    const auto values = axis_values(rc.sweep);
    const SweepAxis axis = rc.sweep.axis;

    std::vector<Unit> units;
    if (axis == SweepAxis::Headway) {
        for (std::size_t s = 0; s < rc.seeds.size(); ++s) units.push_back({0, s});
    } else {
        for (std::size_t v = 0; v < values.size(); ++v)
            for (std::size_t s = 0; s < rc.seeds.size(); ++s) units.push_back({v, s});
    }

    std::vector<UnitOutput> outputs(units.size());
    std::vector<std::exception_ptr> errors(units.size());
    std::atomic<std::size_t> next{0};
    std::mutex report;
    const auto worker = [&] {
        for (std::size_t i = next++; i < units.size(); i = next++) {
            const auto& u = units[i];
            const std::uint64_t seed = rc.seeds[u.seed_index];
            try {
                switch (axis) {
                case SweepAxis::Txp: outputs[i] = run_txp(rc, values[u.value_index], seed); break;
                case SweepAxis::Headway: outputs[i] = run_headway(rc, seed); break;
                case SweepAxis::Gp:
                case SweepAxis::Strategy: outputs[i] = run_local(rc, values[u.value_index], seed); break;
                case SweepAxis::MpCount:
                case SweepAxis::FnCount: outputs[i] = run_wide(rc, values[u.value_index], seed); break;
                }
                if (on_point) {
                    std::lock_guard lock(report);
                    for (const auto& [g, r] : outputs[i].records) on_point(r);
                }
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int n = std::clamp<int>(jobs, 1, static_cast<int>(std::max<std::size_t>(units.size(), 1)));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    // (value, group, seed) ordering; the headway axis reports the value as the group key.
    struct Keyed {
        std::size_t value, group, seed;
        SweepRecord record;
    };
    std::vector<Keyed> keyed;
    SweepResult result;
    result.axis = axis;
    result.metric_names = sweep_metric_names(axis);
    for (std::size_t i = 0; i < units.size(); ++i) {
        for (auto& [g, r] : outputs[i].records) {
            if (axis == SweepAxis::Headway)
                keyed.push_back({g, 0, units[i].seed_index, std::move(r)});
            else
                keyed.push_back({units[i].value_index, g, units[i].seed_index, std::move(r)});
        }
        for (auto& d : outputs[i].data) result.data.push_back(std::move(d));
    }
    std::stable_sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
        return std::tie(a.value, a.group, a.seed) < std::tie(b.value, b.group, b.seed);
    });
    for (auto& k : keyed) result.records.push_back(std::move(k.record));
    return result;
}

std::vector<SummaryRow> summarize(const SweepResult& result) {
    std::vector<SummaryRow> rows;
    std::vector<std::vector<RunningStats>> stats;
    for (const auto& r : result.records) {
        if (rows.empty() || rows.back().value != r.value || rows.back().group != r.group) {
            rows.push_back({r.value, r.group, 0, {}, {}});
            stats.emplace_back(r.metrics.size());
        }
        rows.back().n += 1;
        for (std::size_t m = 0; m < r.metrics.size(); ++m) stats.back()[m].add(r.metrics[m]);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto& st : stats[i]) {
            rows[i].mean.push_back(st.mean());
            const double n = static_cast<double>(st.count());
            rows[i].stddev.push_back(n > 1 ? std::sqrt(st.variance() * n / (n - 1)) : 0.0);
        }
    }
    return rows;
}

namespace {

void write_key_header(std::ostream& out, SweepAxis axis) {
    out << to_string(axis);
    if (axis == SweepAxis::Txp) out << ",setting";
}

void write_key(std::ostream& out, SweepAxis axis, const std::string& value, const std::string& group) {
    out << value;
    if (axis == SweepAxis::Txp) out << ',' << group;
}

} // namespace

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
    write_key_header(out, result.axis);
    out << ",seed";
    for (const auto& m : result.metric_names) out << ',' << m;
    out << '\n';
    for (const auto& r : result.records) {
        write_key(out, result.axis, r.value, r.group);
        out << ',' << r.seed;
        for (double v : r.metrics) out << ',' << csv::format(v);
        out << '\n';
    }
}

void write_summary_csv(std::ostream& out, const SweepResult& result, std::span<const SummaryRow> rows) {
    write_key_header(out, result.axis);
    out << ",n";
    for (const auto& m : result.metric_names) out << ',' << m << "_mean," << m << "_sd";
    out << '\n';
    for (const auto& r : rows) {
        write_key(out, result.axis, r.value, r.group);
        out << ',' << r.n;
        for (std::size_t m = 0; m < r.mean.size(); ++m)
            out << ',' << csv::format(r.mean[m]) << ',' << csv::format(r.stddev[m]);
        out << '\n';
    }
}

} // namespace liver
