#include "liver/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "liver/csv.hpp"

namespace liver {

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names{"tc",         "lt_us",   "rxct",   "ro_us", "r", "rssi_avg_dbm",
                                                "rssi_sd_db", "lqi_avg", "lqi_sd", "hc"};
    return names;
}

std::vector<double> feature_values(const FeatureVector& fv, std::span<const std::string> names) {
    std::vector<double> out;
    out.reserve(names.size());
    for (const auto& n : names) {
        if (n == "tc") out.push_back(fv.tc);
        else if (n == "lt_us") out.push_back(fv.lt_us);
        else if (n == "rxct") out.push_back(fv.rxct);
        else if (n == "ro_us") out.push_back(fv.ro_us);
        else if (n == "r") out.push_back(fv.r);
        else if (n == "rssi_avg_dbm") out.push_back(fv.rssi_avg_dbm);
        else if (n == "rssi_sd_db") out.push_back(fv.rssi_sd_db);
        else if (n == "lqi_avg") out.push_back(fv.lqi_avg);
        else if (n == "lqi_sd") out.push_back(fv.lqi_sd);
        else if (n == "hc") out.push_back(fv.hc);
        else throw Error("unknown feature '" + n + "'");
    }
    return out;
}

void RunningStats::add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

double RunningStats::stddev() const { return std::sqrt(std::max(0.0, variance())); }

FeatureVector extract_window(std::span<const GlossyRunResult> results, NodeId receiver, const ExtractOptions& options) {
    if (results.empty()) throw Error("extract_window: no instances in window");
    FeatureVector fv;
    fv.t_start_us = results.front().start_time;
    RunningStats rssi;
    RunningStats lqi;
    std::size_t decoded = 0;
    for (const auto& res : results) {
        const auto& rx = res.at(receiver);
        fv.tc += res.at(res.initiator).initiator_timeout_count;
        fv.rxct += rx.rx_count;
        fv.ro_us += static_cast<double>(rx.radio_on);
        fv.lt_us = std::max(fv.lt_us, static_cast<double>(rx.latency.value_or(res.max_duration)));
        fv.ntx_total += res.ntx;
        if (rx.received) ++decoded;
        for (double v : rx.rssi) rssi.add(v);
        for (double v : rx.lqi) lqi.add(v);
    }
    fv.r = static_cast<double>(decoded) / static_cast<double>(results.size());
    if (rssi.count() > 0) {
        fv.rssi_avg_dbm = rssi.mean();
        fv.rssi_sd_db = rssi.stddev();
    } else {
        fv.rssi_avg_dbm = options.rssi_sentinel_dbm;
    }
    if (lqi.count() > 0) {
        fv.lqi_avg = lqi.mean();
        fv.lqi_sd = lqi.stddev();
    } else {
        fv.lqi_avg = options.lqi_sentinel;
    }
    fv.hc = options.hop_count.value_or(0);
    return fv;
}

std::string to_string(RoadSetting s) { return s == RoadSetting::OffRoad ? "off-road" : "on-road"; }

RoadSetting parse_road_setting(const std::string& s) {
    if (s == "off-road") return RoadSetting::OffRoad;
    if (s == "on-road") return RoadSetting::OnRoad;
    throw Error("unknown road setting '" + s + "' (expected off-road or on-road)");
}

std::vector<ReliabilityPoint> reliability_curve(std::span<const ReliabilitySample> samples, std::size_t min_windows) {
    std::map<std::pair<int, int>, RunningStats> groups;
    for (const auto& s : samples) groups[{static_cast<int>(s.setting), s.txp}].add(s.r);
    std::vector<ReliabilityPoint> out;
    for (const auto& [key, stats] : groups) {
        const auto setting = static_cast<RoadSetting>(key.first);
        if (stats.count() < min_windows)
            throw Error("insufficient samples at TXP " + std::to_string(key.second) + " (" + to_string(setting) +
                        "): " + std::to_string(stats.count()) + " < " + std::to_string(min_windows));
        out.push_back({key.second, setting, stats.count(), stats.mean(), stats.stddev()});
    }
    return out;
}

namespace {

const std::vector<std::string> kFeatureHeader{"tc",      "lt_us",  "rxct", "ro_us",      "r",      "rssi_avg_dbm", "rssi_sd_db",
                                              "lqi_avg", "lqi_sd", "hc",   "t_start_us", "period", "label"};

const std::vector<std::string> kTraceHeader{"period",   "window_start_us", "instance", "start_us", "end_us",
                                            "max_duration_us", "slot_us", "ntx",     "tc",       "received",
                                            "rx_count", "latency_us",      "radio_on_us", "hc",    "rssi",
                                            "lqi"};

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ';';
        s += csv::format(v[i]);
    }
    return s;
}

std::vector<double> parse_list(const std::string& field, std::string_view what) {
    std::vector<double> out;
    if (field.empty()) return out;
    for (const auto& part : csv::split(field, ';')) out.push_back(csv::to_double(part, what));
    return out;
}

} // namespace

void write_features_csv(std::ostream& out, std::span<const FeatureVector> rows) {
    for (std::size_t i = 0; i < kFeatureHeader.size(); ++i) out << (i ? "," : "") << kFeatureHeader[i];
    out << '\n';
    for (const auto& f : rows) {
        out << csv::format(f.tc) << ',' << csv::format(f.lt_us) << ',' << csv::format(f.rxct) << ','
            << csv::format(f.ro_us) << ',' << csv::format(f.r) << ',' << csv::format(f.rssi_avg_dbm) << ','
            << csv::format(f.rssi_sd_db) << ',' << csv::format(f.lqi_avg) << ',' << csv::format(f.lqi_sd) << ','
            << csv::format(f.hc) << ',' << f.t_start_us << ',' << f.period << ','
            << (f.label ? to_string(*f.label) : std::string{}) << '\n';
    }
}

std::vector<FeatureVector> read_features_csv(std::istream& in) {
    csv::Reader reader(in, kFeatureHeader);
    std::vector<FeatureVector> rows;
    while (reader.next()) {
        FeatureVector f;
        f.tc = reader.real(0);
        f.lt_us = reader.real(1);
        f.rxct = reader.real(2);
        f.ro_us = reader.real(3);
        f.r = reader.real(4);
        f.rssi_avg_dbm = reader.real(5);
        f.rssi_sd_db = reader.real(6);
        f.lqi_avg = reader.real(7);
        f.lqi_sd = reader.real(8);
        f.hc = reader.real(9);
        f.t_start_us = reader.integer(10);
        f.period = reader.integer(11);
        if (!reader[12].empty()) {
            try {
                f.label = parse_label(reader[12]);
            } catch (const Error& e) {
                reader.fail(e.what());
            }
        }
        if (f.r < 0 || f.r > 1) reader.fail("r must lie in [0, 1]");
        rows.push_back(f);
    }
    return rows;
}

TraceRow to_trace_row(const GlossyRunResult& result, NodeId receiver, std::int64_t period, Micros window_start,
                      int instance, int hop_count) {
    const auto& rx = result.at(receiver);
    TraceRow row;
    row.period = period;
    row.window_start = window_start;
    row.instance = instance;
    row.start = result.start_time;
    row.end = result.end_time;
    row.max_duration = result.max_duration;
    row.slot = result.slot_duration;
    row.ntx = result.ntx;
    row.tc = result.at(result.initiator).initiator_timeout_count;
    row.received = rx.received;
    row.rx_count = rx.rx_count;
    row.latency = rx.latency;
    row.radio_on = rx.radio_on;
    row.hc = hop_count;
    row.rssi = rx.rssi;
    row.lqi = rx.lqi;
    return row;
}

GlossyRunResult from_trace_row(const TraceRow& row) {
    GlossyRunResult res;
    res.initiator = 0;
    res.start_time = row.start;
    res.end_time = row.end;
    res.slot_duration = row.slot;
    res.max_duration = row.max_duration;
    res.ntx = row.ntx;
    NodeOutcome init;
    init.id = 0;
    init.initiator_timeout_count = row.tc;
    NodeOutcome rx;
    rx.id = 1;
    rx.received = row.received;
    rx.rx_count = row.rx_count;
    rx.latency = row.latency;
    rx.radio_on = row.radio_on;
    rx.rssi = row.rssi;
    rx.lqi = row.lqi;
    if (row.received) rx.first_rx_relay_count = 1;
    res.nodes = {init, rx};
    return res;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows) {
    for (std::size_t i = 0; i < kTraceHeader.size(); ++i) out << (i ? "," : "") << kTraceHeader[i];
    out << '\n';
    for (const auto& r : rows) {
        out << r.period << ',' << r.window_start << ',' << r.instance << ',' << r.start << ',' << r.end << ','
            << r.max_duration << ',' << r.slot << ',' << r.ntx << ',' << r.tc << ',' << (r.received ? 1 : 0) << ','
            << r.rx_count << ',' << (r.latency ? std::to_string(*r.latency) : std::string{}) << ',' << r.radio_on
            << ',' << r.hc << ',' << join(r.rssi) << ',' << join(r.lqi) << '\n';
    }
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
    csv::Reader reader(in, kTraceHeader);
    std::vector<TraceRow> rows;
    while (reader.next()) {
        TraceRow r;
        r.period = reader.integer(0);
        r.window_start = reader.integer(1);
        r.instance = static_cast<int>(reader.integer(2));
        r.start = reader.integer(3);
        r.end = reader.integer(4);
        r.max_duration = reader.integer(5);
        r.slot = reader.integer(6);
        r.ntx = static_cast<int>(reader.integer(7));
        r.tc = static_cast<int>(reader.integer(8));
        r.received = reader.integer(9) != 0;
        r.rx_count = static_cast<int>(reader.integer(10));
        if (!reader[11].empty()) r.latency = reader.integer(11);
        r.radio_on = reader.integer(12);
        r.hc = static_cast<int>(reader.integer(13));
        try {
            r.rssi = parse_list(reader[14], "rssi");
            r.lqi = parse_list(reader[15], "lqi");
        } catch (const Error& e) {
            reader.fail(e.what());
        }
        if (!rows.empty() && r.start < rows.back().start)
            reader.fail("timestamp disorder: start_us " + std::to_string(r.start) + " precedes " +
                        std::to_string(rows.back().start));
        if (r.received != r.latency.has_value()) reader.fail("received and latency_us disagree");
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace liver
