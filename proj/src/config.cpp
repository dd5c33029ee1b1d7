#include "liver/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "liver/csv.hpp"

namespace liver {

ConfigError::ConfigError(const std::string& source, int line_, int column_, const std::string& message)
    : Error(source + ":" + std::to_string(line_) + ":" + std::to_string(column_) + ": " + message),
      line(line_),
      column(column_) {}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, 16);
    std::string s(buf, res.ptr);
    return std::string(16 - s.size(), '0') + s;
}

namespace {

struct Ctx {
    std::string source;
    bool strict = true;

    [[noreturn]] void fail(const YAML::Mark& m, const std::string& msg) const {
        throw ConfigError(source, m.line + 1, m.column + 1, msg);
    }
    [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const { fail(n.Mark(), msg); }
};

template <class T>
T scalar(const Ctx& ctx, const YAML::Node& n, const std::string& key);

template <>
std::string scalar<std::string>(const Ctx& ctx, const YAML::Node& n, const std::string& key) {
    if (!n.IsScalar()) ctx.fail(n, "'" + key + "' must be a scalar");
    return n.Scalar();
}

template <>
double scalar<double>(const Ctx& ctx, const YAML::Node& n, const std::string& key) {
    const auto s = scalar<std::string>(ctx, n, key);
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        ctx.fail(n, "'" + key + "' must be a finite number, got '" + s + "'");
    return v;
}

template <>
std::int64_t scalar<std::int64_t>(const Ctx& ctx, const YAML::Node& n, const std::string& key) {
    const auto s = scalar<std::string>(ctx, n, key);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) ctx.fail(n, "'" + key + "' must be an integer, got '" + s + "'");
    return v;
}

template <>
std::uint64_t scalar<std::uint64_t>(const Ctx& ctx, const YAML::Node& n, const std::string& key) {
    const auto s = scalar<std::string>(ctx, n, key);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        ctx.fail(n, "'" + key + "' must be a non-negative integer, got '" + s + "'");
    return v;
}

template <>
int scalar<int>(const Ctx& ctx, const YAML::Node& n, const std::string& key) {
    const auto v = scalar<std::int64_t>(ctx, n, key);
    if (v < INT32_MIN || v > INT32_MAX) ctx.fail(n, "'" + key + "' is out of range");
    return static_cast<int>(v);
}

template <>
bool scalar<bool>(const Ctx& ctx, const YAML::Node& n, const std::string& key) {
    const auto s = scalar<std::string>(ctx, n, key);
    if (s == "true") return true;
    if (s == "false") return false;
    ctx.fail(n, "'" + key + "' must be true or false, got '" + s + "'");
}

/// A mapping whose keys must all be consumed.
class Section {
public:
    Section(const Ctx& ctx, const YAML::Node& node, std::string name) : ctx_(ctx), node_(node), name_(std::move(name)) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) ctx_.fail(node_, "section '" + name_ + "' must be a mapping");
    }

    bool has(const std::string& key) const {
        const YAML::Node& n = node_;
        return n && n.IsMap() && n[key];
    }

    YAML::Node take(const std::string& key) {
        used_.insert(key);
        const YAML::Node& n = node_;
        return n[key];
    }

    template <class T>
    void read(const std::string& key, T& out) {
        if (has(key)) out = scalar<T>(ctx_, take(key), qualified(key));
    }

    /// Durations: the YAML value is in `scale` microseconds (1000 for *_ms).
    void read_time(const std::string& key, Micros& out, double scale) {
        if (!has(key)) return;
        const auto n = take(key);
        const double v = scalar<double>(ctx_, n, qualified(key)) * scale;
        if (std::abs(v) > 9e15) ctx_.fail(n, "'" + qualified(key) + "' is out of range");
        out = static_cast<Micros>(std::llround(v));
    }

    template <class E, class Parse>
    void read_enum(const std::string& key, E& out, Parse parse) {
        if (!has(key)) return;
        const auto n = take(key);
        try {
            out = parse(scalar<std::string>(ctx_, n, qualified(key)));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            ctx_.fail(n, e.what());
        }
    }

    /// Sequence of scalars.
    template <class T>
    bool read_list(const std::string& key, std::vector<T>& out) {
        if (!has(key)) return false;
        const auto n = take(key);
        if (!n.IsSequence()) ctx_.fail(n, "'" + qualified(key) + "' must be a list");
        out.clear();
        for (const auto& item : n) out.push_back(scalar<T>(ctx_, item, qualified(key)));
        return true;
    }

    /// Runs check(); any Error it throws is anchored at this section.
    template <class F>
    void check(F&& f) const {
        try {
            f();
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            if (node_ && !node_.IsNull())
                ctx_.fail(node_, "in section '" + name_ + "': " + e.what());
            throw ConfigError(ctx_.source, 1, 1, "in section '" + name_ + "': " + e.what());
        }
    }

    void done() const {
        if (!node_ || !node_.IsMap()) return;
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            const auto key = it->first.Scalar();
            if (!used_.count(key)) ctx_.fail(it->first, "unknown key '" + key + "' in section '" + name_ + "'");
        }
    }

    const Ctx& ctx() const { return ctx_; }
    std::string qualified(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

private:
    const Ctx& ctx_;
    YAML::Node node_;
    std::string name_;
    std::set<std::string> used_;
};

SizeClass size_key(const Ctx& ctx, const YAML::Node& key) {
    try {
        return parse_size_class(key.Scalar());
    } catch (const Error& e) {
        ctx.fail(key, e.what());
    }
}

void parse_scenario(const Ctx& ctx, const YAML::Node& n, Scenario& sc) {
    Section s(ctx, n, "scenario");
    if (s.has("name")) {
        const auto nn = s.take("name");
        try {
            sc = Scenario::named(scalar<std::string>(ctx, nn, "scenario.name"));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            ctx.fail(nn, e.what());
        }
    }
    s.read("width_m", sc.width_m);
    s.read("height_m", sc.height_m);
    s.read("inter_mp_m", sc.inter_mp_m);
    s.read("mp_separation_m", sc.mp_separation_m);
    s.read("mp_count", sc.mp_count);
    s.read("fn_count", sc.fn_count);
    s.read("fn_offset_m", sc.fn_offset_m);
    if (s.has("fn_positions")) {
        const auto list = s.take("fn_positions");
        if (!list.IsSequence()) ctx.fail(list, "'scenario.fn_positions' must be a list of [x, y] pairs");
        sc.fn_positions.clear();
        for (const auto& p : list) {
            if (!p.IsSequence() || p.size() != 2) ctx.fail(p, "forwarder position must be [x, y]");
            sc.fn_positions.push_back({scalar<double>(ctx, p[0], "fn_positions.x"), scalar<double>(ctx, p[1], "fn_positions.y")});
        }
    }
    s.done();
    s.check([&] { sc.validate(); });
}

void parse_schedule(const Ctx& ctx, const YAML::Node& n, PhaseSchedule& sch) {
    Section s(ctx, n, "schedule");
    s.read_time("gp_ms", sch.gp, 1000);
    s.read_time("t_sc_ms", sch.t_sc, 1000);
    if (s.has("t_sc_gap_ms"))
        s.read_time("t_sc_gap_ms", sch.t_sc_gap, 1000);
    else
        sch.t_sc_gap = sch.gp - sch.t_sc;
    s.read_time("t_dc_ms", sch.t_dc, 1000);
    s.read_time("t_dc_gap_ms", sch.t_dc_gap, 1000);
    s.read_time("t_scdc_gap_ms", sch.t_scdc_gap, 1000);
    s.read("ni", sch.ni);
    s.read_time("d_x_ms", sch.d_x, 1000);
    s.read_enum("strategy", sch.strategy, parse_strategy);
    s.read("txp_sc", sch.txp_sc);
    s.read("txp_dc", sch.txp_dc);
    s.read_time("t_cp_min_ms", sch.t_cp_min, 1000);
    s.read("txp_override", sch.txp_override);
    s.done();
    s.check([&] {
        sch.check();
        if (ctx.strict && sch.strategy != Strategy::PG) {
            const auto report = validate(sch);
            if (!report.ok()) throw Error("timing constraints violated:\n" + report.to_text());
        }
    });
}

void parse_traffic(const Ctx& ctx, const YAML::Node& n, TrafficParams& t) {
    Section s(ctx, n, "traffic");
    s.read("enabled", t.enabled);
    s.read("mean_headway_s", t.mean_headway_s);
    std::vector<double> mix;
    if (s.read_list("class_mix", mix)) {
        if (mix.size() != 3) ctx.fail(n["class_mix"], "'traffic.class_mix' needs three weights (S, M, L)");
        t.class_mix = {mix[0], mix[1], mix[2]};
    }
    auto& c = t.config;
    s.read("min_gap_s", c.min_gap_s);
    s.read("corridor_width_m", c.corridor_width_m);
    s.read("min_contact_period_s", c.min_contact_period_s);
    s.read("lanes", c.lanes);
    s.read("lane_width_m", c.lane_width_m);
    if (s.has("classes")) {
        const auto classes = s.take("classes");
        if (!classes.IsMap()) ctx.fail(classes, "'traffic.classes' must map S/M/L to their ranges");
        for (auto it = classes.begin(); it != classes.end(); ++it) {
            const auto tag = size_key(ctx, it->first);
            auto& spec = c.classes[static_cast<std::size_t>(tag)];
            Section cs(ctx, it->second, "traffic.classes." + it->first.Scalar());
            for (const auto* key : {"length_m", "speed_mps"}) {
                if (!cs.has(key)) continue;
                const auto node = it->second[key];
                std::vector<double> v;
                cs.read_list(key, v);
                if (v.size() != 2) ctx.fail(node, std::string("'") + key + "' must be [min, max]");
                if (std::string(key) == "length_m") {
                    spec.length_min_m = v[0];
                    spec.length_max_m = v[1];
                } else {
                    spec.speed_min_mps = v[0];
                    spec.speed_max_mps = v[1];
                }
            }
            cs.done();
        }
    }
    s.done();
    s.check([&] {
        c.validate();
        if (t.enabled && !(t.mean_headway_s > 0)) throw Error("mean_headway_s must be > 0");
        for (double w : t.class_mix)
            if (!(w >= 0)) throw Error("class_mix weights must be >= 0");
    });
}

void parse_channel(const Ctx& ctx, const YAML::Node& n, ExperimentConfig& e) {
    Section s(ctx, n, "channel");
    auto& cal = e.calibration;
    if (s.has("txp_to_rxpower")) {
        const auto m = s.take("txp_to_rxpower");
        if (!m.IsMap() || m.size() == 0) ctx.fail(m, "'channel.txp_to_rxpower' must map power index to dBm");
        cal.txp_to_rxpower.clear();
        for (auto it = m.begin(); it != m.end(); ++it)
            cal.txp_to_rxpower[scalar<int>(ctx, it->first, "txp")] = scalar<double>(ctx, it->second, "dBm");
    }
    s.read("reference_distance_m", cal.reference_distance_m);
    s.read("path_loss_exponent", cal.path_loss_exponent);
    s.read("noise_floor_dbm", cal.noise_floor_dbm);
    s.read("prr_midpoint_offset_db", cal.prr_curve.midpoint_offset_db);
    s.read("prr_width_db", cal.prr_curve.width_db);
    s.read("capture_margin_db", cal.capture_margin_db);
    s.read("rssi_sigma_db", cal.rssi_sigma_db);
    s.read("lqi_sigma", cal.lqi_sigma);
    if (s.has("attenuation_db")) {
        const auto m = s.take("attenuation_db");
        if (!m.IsMap()) ctx.fail(m, "'channel.attenuation_db' must map S/M/L to dB");
        for (auto it = m.begin(); it != m.end(); ++it)
            e.obstruction.attenuation_db[static_cast<std::size_t>(size_key(ctx, it->first))] =
                scalar<double>(ctx, it->second, "attenuation_db");
    }
    s.read("partial_factor", e.obstruction.partial_factor);
    s.read("obstruction_radius_m", e.obstruction_radius_m);
    s.done();
    s.check([&] {
        cal.validate();
        e.obstruction.validate();
        if (!(e.obstruction_radius_m >= 0)) throw Error("obstruction_radius_m must be >= 0");
    });
}

void parse_classifier(const Ctx& ctx, const YAML::Node& n, ClassifierConfig& c) {
    Section s(ctx, n, "classifier");
    s.read_enum("kernel", c.svm.kernel, parse_kernel);
    s.read("gamma", c.svm.gamma);
    s.read("c", c.svm.c);
    s.read("tolerance", c.svm.tolerance);
    s.read("max_iterations", c.svm.max_iterations);
    s.read("class_weighting", c.svm.class_weighting);
    if (s.has("cache_mb")) {
        const auto mb = scalar<std::int64_t>(ctx, s.take("cache_mb"), "classifier.cache_mb");
        if (mb < 1) ctx.fail(n["cache_mb"], "'classifier.cache_mb' must be >= 1");
        c.svm.cache_bytes = static_cast<std::size_t>(mb) << 20;
    }
    s.read("seed", c.svm.seed);
    s.read_enum("view", c.view, parse_label_view);
    s.read_enum("scoring", c.scoring, parse_scoring);
    s.read_list("features", c.features);
    s.read("train_fraction", c.train_fraction);
    s.done();
    s.check([&] { c.validate(); });
}

void parse_txp_study(const Ctx& ctx, const YAML::Node& n, TxpStudy& t) {
    Section s(ctx, n, "txp_study");
    s.read("windows", t.windows);
    s.read_time("spacing_ms", t.spacing, 1000);
    s.read("ntx", t.flood.ntx);
    s.read_time("slot_us", t.flood.slot_duration, 1);
    int timeout_slots = t.flood.timeout_slots();
    s.read("timeout_slots", timeout_slots);
    t.flood.initiator_timeout = timeout_slots * t.flood.slot_duration;
    s.read_time("max_duration_ms", t.flood.max_duration, 1000);
    s.read("persistent", t.flood.persistent);
    std::vector<std::string> settings;
    if (s.has("settings")) {
        const auto node = n["settings"];
        s.read_list("settings", settings);
        t.settings.clear();
        for (std::size_t i = 0; i < settings.size(); ++i) {
            try {
                t.settings.push_back(parse_road_setting(settings[i]));
            } catch (const Error& e) {
                ctx.fail(node[i], e.what());
            }
        }
    }
    s.done();
    s.check([&] {
        if (t.windows < 1) throw Error("windows must be >= 1");
        if (t.settings.empty()) throw Error("settings must not be empty");
        t.flood.validate();
        if (t.spacing < t.flood.max_duration) throw Error("spacing_ms shorter than one flood");
    });
}

void parse_sweep(const Ctx& ctx, const YAML::Node& n, SweepSpec& sw) {
    Section s(ctx, n, "sweep");
    if (s.has("axis")) {
        s.read_enum("axis", sw.axis, parse_sweep_axis);
        sw.values.clear();
        sw.strategies.clear();
    }
    if (s.has("values")) {
        const auto v = s.take("values");
        sw.values.clear();
        sw.strategies.clear();
        if (sw.axis == SweepAxis::Strategy) {
            if (!v.IsSequence()) ctx.fail(v, "'sweep.values' must be a list of strategies");
            for (const auto& item : v) {
                try {
                    sw.strategies.push_back(parse_strategy(scalar<std::string>(ctx, item, "sweep.values")));
                } catch (const ConfigError&) {
                    throw;
                } catch (const Error& e) {
                    ctx.fail(item, e.what());
                }
            }
        } else if (v.IsMap()) {
            Section r(ctx, v, "sweep.values");
            double from = 0, to = 0, step = 1;
            if (!r.has("from") || !r.has("to")) ctx.fail(v, "a value range needs 'from' and 'to'");
            r.read("from", from);
            r.read("to", to);
            r.read("step", step);
            r.done();
            if (!(step > 0)) ctx.fail(v, "'sweep.values.step' must be > 0");
            if (to < from) ctx.fail(v, "'sweep.values.to' must be >= 'from'");
            const auto count = static_cast<std::int64_t>(std::floor((to - from) / step + 1e-9)) + 1;
            if (count > 100000) ctx.fail(v, "value range has too many points");
            for (std::int64_t i = 0; i < count; ++i) sw.values.push_back(from + static_cast<double>(i) * step);
        } else {
            if (!v.IsSequence()) ctx.fail(v, "'sweep.values' must be a list or a {from, to, step} range");
            for (const auto& item : v) sw.values.push_back(scalar<double>(ctx, item, "sweep.values"));
        }
    }
    s.done();
}

/// Domain checks of sweep values, anchored at the offending list entry when
/// the values were given as a list.
void check_sweep(const Ctx& ctx, const YAML::Node& node, const RunConfig& rc) {
    const YAML::Node values = node && node.IsMap() ? node["values"] : YAML::Node();
    const auto anchor = [&](std::size_t i) -> YAML::Node {
        if (values && values.IsSequence() && i < values.size()) return values[i];
        if (values) return values;
        return node;
    };
    const auto& sw = rc.sweep;
    const std::size_t n = sw.axis == SweepAxis::Strategy ? sw.strategies.size() : sw.values.size();
    if (n == 0) {
        if (node) ctx.fail(node, to_string(sw.axis) + " sweep needs at least one value");
        throw ConfigError(ctx.source, 1, 1, to_string(sw.axis) + " sweep needs at least one value");
    }
    for (std::size_t i = 0; i < n; ++i) {
        RunConfig one = rc;
        if (sw.axis == SweepAxis::Strategy)
            one.sweep.strategies = {sw.strategies[i]};
        else
            one.sweep.values = {sw.values[i]};
        try {
            one.validate();
        } catch (const Error& e) {
            const auto a = anchor(i);
            if (a) ctx.fail(a, e.what());
            throw ConfigError(ctx.source, 1, 1, e.what());
        }
    }
}

RunConfig parse_root(const Ctx& ctx, const YAML::Node& root) {
    RunConfig rc;
    if (!root || root.IsNull()) return rc;
    if (!root.IsMap()) ctx.fail(root, "configuration must be a mapping");
    Section top(ctx, root, "");

    top.read("preset", rc.preset);
    if (rc.preset != "roadside" && rc.preset != "wide-area")
        ctx.fail(root["preset"], "unknown preset '" + rc.preset + "' (expected roadside or wide-area)");
    Scenario sc = rc.preset == "roadside" ? roadside_config().scenario : Scenario::es1();
    if (top.has("scenario")) parse_scenario(ctx, top.take("scenario"), sc);
    rc.experiment = rc.preset == "roadside" ? roadside_config() : wide_area_config(sc);
    rc.experiment.scenario = sc;
    auto& e = rc.experiment;

    if (top.has("schedule")) parse_schedule(ctx, top.take("schedule"), e.schedule);
    if (top.has("measurement")) {
        Section s(ctx, top.take("measurement"), "measurement");
        s.read_time("slot_us", e.dc.slot, 1);
        s.read("timeout_slots", e.dc.timeout_slots);
        s.read("split_ntx", e.dc.split_ntx);
        s.read("pg_ntx", e.dc.pg_ntx);
        s.read("pg_persistent", e.dc.pg_persistent);
        s.done();
        s.check([&] {
            e.dc.validate();
            e.dc.instance_config(e.schedule);
        });
    }
    if (top.has("sync")) {
        Section s(ctx, top.take("sync"), "sync");
        s.read_time("slot_us", e.sc.slot, 1);
        s.read("ntx", e.sc.ntx);
        s.read("timeout_slots", e.sc.timeout_slots);
        std::int64_t initiator = e.sc_initiator;
        s.read("initiator", initiator);
        s.done();
        s.check([&] {
            e.sc.config(e.schedule).validate();
            if (initiator < 0 || initiator >= e.scenario.node_count()) throw Error("initiator is not a node");
        });
        e.sc_initiator = static_cast<NodeId>(initiator);
    }
    if (top.has("iphase")) {
        Section s(ctx, top.take("iphase"), "iphase");
        s.read("enabled", e.iphase);
        s.read_time("slot_us", e.chaos.slot_duration, 1);
        s.read_time("max_duration_ms", e.chaos.max_duration, 1000);
        s.read("ntx_complete", e.chaos.ntx_complete);
        s.read("tx_budget", e.chaos.tx_budget);
        s.read_time("idle_timeout_us", e.chaos.idle_timeout, 1);
        s.read("txp", e.chaos.txp);
        s.done();
        s.check([&] { e.chaos.validate(); });
    }
    if (top.has("traffic")) parse_traffic(ctx, top.take("traffic"), e.traffic);
    if (top.has("channel")) parse_channel(ctx, top.take("channel"), e);
    if (top.has("run")) {
        Section s(ctx, top.take("run"), "run");
        s.read("periods", e.periods);
        s.read_enum("granularity", e.session.granularity, parse_granularity);
        s.read_enum("label_scope", e.session.label_scope, parse_label_scope);
        s.read("keep_trace", e.session.keep_trace);
        s.done();
        s.check([&] {
            if (e.periods < 1) throw Error("periods must be >= 1");
        });
    }
    if (top.has("classifier")) parse_classifier(ctx, top.take("classifier"), rc.classifier);
    if (top.has("txp_study")) parse_txp_study(ctx, top.take("txp_study"), rc.txp);

    YAML::Node sweep_node;
    if (top.has("sweep")) {
        sweep_node = top.take("sweep");
        parse_sweep(ctx, sweep_node, rc.sweep);
    }
    if (top.has("seeds")) {
        const auto node = root["seeds"];
        top.read_list("seeds", rc.seeds);
        if (rc.seeds.empty()) ctx.fail(node, "'seeds' must not be empty");
    }
    top.read("output", rc.output_dir);
    top.read("emit_data", rc.emit_data);
    top.done();
    if (!ctx.strict) return rc;

    Section whole(ctx, root, "config");
    whole.check([&] { rc.experiment.validate(); });
    check_sweep(ctx, sweep_node, rc);
    return rc;
}

// ---------------------------------------------------------------------------
// Dump

std::string num(double v) { return csv::format(v); }
std::string ms(Micros us) { return csv::format(static_cast<double>(us) / 1000.0); }
std::string boolean(bool b) { return b ? "true" : "false"; }

std::string quoted(const std::string& v) {
    std::string s = "\"";
    for (char ch : v) {
        if (ch == '"' || ch == '\\') s += '\\';
        s += ch;
    }
    return s + "\"";
}

class Writer {
public:
    void section(const std::string& name, const std::string& comment = "") {
        out_ << '\n' << name << ':';
        if (!comment.empty()) out_ << "  # " << comment;
        out_ << '\n';
    }
    void top(const std::string& key, const std::string& value, const std::string& comment) {
        line("", key, value, comment);
    }
    void item(const std::string& key, const std::string& value, const std::string& comment = "") {
        line("  ", key, value, comment);
    }
    std::ostringstream& raw() { return out_; }

private:
    void line(const std::string& indent, const std::string& key, const std::string& value, const std::string& comment) {
        std::string text = indent + key + ": " + value;
        out_ << text;
        if (!comment.empty()) out_ << std::string(text.size() < 36 ? 36 - text.size() : 1, ' ') << "# " << comment;
        out_ << '\n';
    }
    std::ostringstream out_;
};

template <class T, class F>
std::string list(const std::vector<T>& v, F f) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + f(v[i]);
    return s + "]";
}

} // namespace

RunConfig parse_config(const std::string& text, const std::string& source, bool strict) {
    const Ctx ctx{source, strict};
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        ctx.fail(e.mark, e.msg);
    }
    if (root && root.IsMap() && root["manifest_version"]) {
        const auto cfg = root["config"];
        if (!cfg || !cfg.IsScalar()) ctx.fail(root, "manifest has no embedded config");
        return parse_config(cfg.Scalar(), source + " (embedded config)", strict);
    }
    return parse_root(ctx, root);
}

RunConfig load_config(const std::string& path, bool strict) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path, strict);
}

std::string dump_config(const RunConfig& rc) {
    const auto& e = rc.experiment;
    const auto& s = e.schedule;
    Writer w;
    w.raw() << "# Run configuration. Durations carry their unit in the key name.\n";
    w.top("preset", rc.preset, "roadside | wide-area; base values before the overrides below");

    const auto& sc = e.scenario;
    w.section("scenario", "named es1 / es2 / custom, then field overrides");
    w.item("name", sc.name);
    w.item("width_m", num(sc.width_m));
    w.item("height_m", num(sc.height_m));
    w.item("inter_mp_m", num(sc.inter_mp_m), "spacing of MPs along a road and of roads");
    w.item("mp_separation_m", num(sc.mp_separation_m), "initiator to receiver, across the road");
    w.item("mp_count", std::to_string(sc.mp_count));
    w.item("fn_count", std::to_string(sc.fn_count));
    w.item("fn_offset_m", num(sc.fn_offset_m), "forwarder distance beyond its anchor MP node");
    w.item("fn_positions",
           list(sc.fn_positions, [](const Point& p) { return "[" + num(p.x) + ", " + num(p.y) + "]"; }),
           "explicit [x, y] list replaces the generated layout");

    w.section("schedule");
    w.item("gp_ms", ms(s.gp), "period length");
    w.item("t_sc_ms", ms(s.t_sc), "sync flood window");
    w.item("t_sc_gap_ms", ms(s.t_sc_gap), "defaults to gp - t_sc");
    w.item("t_dc_ms", ms(s.t_dc), "one measurement instance");
    w.item("t_dc_gap_ms", ms(s.t_dc_gap));
    w.item("t_scdc_gap_ms", ms(s.t_scdc_gap));
    w.item("ni", std::to_string(s.ni), "instances per period; 0 = as many as fit");
    w.item("d_x_ms", ms(s.d_x), "instance spacing after a dmpg trigger");
    w.item("strategy", to_string(s.strategy), "pg | mpg | dmpg");
    w.item("txp_sc", std::to_string(s.txp_sc));
    w.item("txp_dc", std::to_string(s.txp_dc));
    w.item("t_cp_min_ms", ms(s.t_cp_min), "shortest contact period to cover");
    w.item("txp_override", boolean(s.txp_override), "lift the power band checks");

    w.section("measurement");
    w.item("slot_us", std::to_string(e.dc.slot));
    w.item("timeout_slots", std::to_string(e.dc.timeout_slots));
    w.item("split_ntx", std::to_string(e.dc.split_ntx), "ntx per instance under mpg / dmpg");
    w.item("pg_ntx", std::to_string(e.dc.pg_ntx), "ntx of the single pg instance");
    w.item("pg_persistent", boolean(e.dc.pg_persistent));

    w.section("sync");
    w.item("slot_us", std::to_string(e.sc.slot));
    w.item("ntx", std::to_string(e.sc.ntx));
    w.item("timeout_slots", std::to_string(e.sc.timeout_slots));
    w.item("initiator", std::to_string(e.sc_initiator));

    w.section("iphase", "all-to-all sharing of per-MP flags");
    w.item("enabled", boolean(e.iphase));
    w.item("slot_us", std::to_string(e.chaos.slot_duration));
    w.item("max_duration_ms", ms(e.chaos.max_duration));
    w.item("ntx_complete", std::to_string(e.chaos.ntx_complete));
    w.item("tx_budget", std::to_string(e.chaos.tx_budget));
    w.item("idle_timeout_us", std::to_string(e.chaos.idle_timeout));
    w.item("txp", std::to_string(e.chaos.txp));

    const auto& t = e.traffic;
    w.section("traffic");
    w.item("enabled", boolean(t.enabled));
    w.item("mean_headway_s", num(t.mean_headway_s));
    w.item("class_mix", "[" + num(t.class_mix[0]) + ", " + num(t.class_mix[1]) + ", " + num(t.class_mix[2]) + "]",
           "S, M, L weights");
    w.item("min_gap_s", num(t.config.min_gap_s));
    w.item("corridor_width_m", num(t.config.corridor_width_m));
    w.item("min_contact_period_s", num(t.config.min_contact_period_s), "speed cap; 0 disables");
    w.item("lanes", std::to_string(t.config.lanes));
    w.item("lane_width_m", num(t.config.lane_width_m));
    w.raw() << "  classes:\n";
    for (const auto& c : t.config.classes)
        w.raw() << "    " << to_string(c.tag) << ": {length_m: [" << num(c.length_min_m) << ", " << num(c.length_max_m)
                << "], speed_mps: [" << num(c.speed_min_mps) << ", " << num(c.speed_max_mps) << "]}\n";

    const auto& cal = e.calibration;
    w.section("channel");
    std::string anchors = "{";
    bool first = true;
    for (const auto& [txp, dbm] : cal.txp_to_rxpower) {
        anchors += (first ? "" : ", ") + std::to_string(txp) + ": " + num(dbm);
        first = false;
    }
    w.item("txp_to_rxpower", anchors + "}", "dBm at reference distance");
    w.item("reference_distance_m", num(cal.reference_distance_m));
    w.item("path_loss_exponent", num(cal.path_loss_exponent));
    w.item("noise_floor_dbm", num(cal.noise_floor_dbm));
    w.item("prr_midpoint_offset_db", num(cal.prr_curve.midpoint_offset_db));
    w.item("prr_width_db", num(cal.prr_curve.width_db));
    w.item("capture_margin_db", num(cal.capture_margin_db));
    w.item("rssi_sigma_db", num(cal.rssi_sigma_db));
    w.item("lqi_sigma", num(cal.lqi_sigma));
    const auto& a = e.obstruction.attenuation_db;
    w.item("attenuation_db", "{S: " + num(a[0]) + ", M: " + num(a[1]) + ", L: " + num(a[2]) + "}");
    w.item("partial_factor", num(e.obstruction.partial_factor));
    w.item("obstruction_radius_m", num(e.obstruction_radius_m));

    w.section("run");
    w.item("periods", std::to_string(e.periods));
    w.item("granularity", to_string(e.session.granularity), "window | instance");
    w.item("label_scope", to_string(e.session.label_scope), "probe | period");
    w.item("keep_trace", boolean(e.session.keep_trace));

    const auto& c = rc.classifier;
    w.section("classifier");
    w.item("kernel", to_string(c.svm.kernel), "rbf | linear");
    w.item("gamma", num(c.svm.gamma), "0 = 1 / feature count");
    w.item("c", num(c.svm.c));
    w.item("tolerance", num(c.svm.tolerance));
    w.item("max_iterations", std::to_string(c.svm.max_iterations), "0 = automatic");
    w.item("class_weighting", boolean(c.svm.class_weighting));
    w.item("cache_mb", std::to_string(c.svm.cache_bytes >> 20));
    w.item("seed", std::to_string(c.svm.seed));
    w.item("view", to_string(c.view), "detection | four | seven");
    w.item("scoring", to_string(c.scoring), "exact | four-class");
    w.item("features", list(c.features, [](const std::string& f) { return f; }));
    w.item("train_fraction", num(c.train_fraction));

    w.section("txp_study", "used by the txp axis");
    w.item("windows", std::to_string(rc.txp.windows), "floods per power level and setting");
    w.item("spacing_ms", ms(rc.txp.spacing));
    w.item("ntx", std::to_string(rc.txp.flood.ntx));
    w.item("slot_us", std::to_string(rc.txp.flood.slot_duration));
    w.item("timeout_slots", std::to_string(rc.txp.flood.timeout_slots()));
    w.item("max_duration_ms", ms(rc.txp.flood.max_duration));
    w.item("persistent", boolean(rc.txp.flood.persistent));
    w.item("settings", list(rc.txp.settings, [](RoadSetting r) { return to_string(r); }), "off-road | on-road");

    w.section("sweep");
    w.item("axis", to_string(rc.sweep.axis), "txp | headway | gp | strategy | mp_count | fn_count");
    if (rc.sweep.axis == SweepAxis::Strategy)
        w.item("values", list(rc.sweep.strategies, [](Strategy x) { return to_string(x); }));
    else
        w.item("values", list(rc.sweep.values, [](double v) { return num(v); }), "list or {from, to, step}");

    w.raw() << '\n';
    w.top("seeds", list(rc.seeds, [](std::uint64_t v) { return std::to_string(v); }), "one run per seed and point");
    w.top("output", quoted(rc.output_dir), "output directory");
    w.top("emit_data", boolean(rc.emit_data), "also write features, traces and ground truth");
    return w.raw().str();
}

} // namespace liver
