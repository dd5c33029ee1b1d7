#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "liver/glossy.hpp"
#include "liver/traffic.hpp"

namespace liver {

/// Link-layer and PHY features of one measurement window.
struct FeatureVector {
    double tc = 0;     ///< initiator attempts, summed over instances
    double lt_us = 0;  ///< worst receiver latency
    double rxct = 0;   ///< receiver receptions, summed
    double ro_us = 0;  ///< receiver radio-on time, summed
    double r = 0;      ///< fraction of instances the receiver decoded
    double rssi_avg_dbm = 0;
    double rssi_sd_db = 0;
    double lqi_avg = 0;
    double lqi_sd = 0;
    double hc = 0;
    Micros t_start_us = 0;
    std::int64_t period = 0;
    std::optional<Label> label;
    /// Total ntx budget of the instances; not serialized.
    int ntx_total = 0;

    bool operator==(const FeatureVector&) const = default;
};

/// Names of the numeric feature columns, in CSV order.
const std::vector<std::string>& feature_names();
/// Numeric features selected by name, in the given order.
std::vector<double> feature_values(const FeatureVector& fv, std::span<const std::string> names);

struct ExtractOptions {
    /// RSSI average reported when nothing was received.
    double rssi_sentinel_dbm = -98.0;
    /// LQI average reported when nothing was received.
    double lqi_sentinel = 50.0;
    std::optional<int> hop_count;
};

/// Reduces the instances of one window to a feature vector. Sums TC, RXCT and
/// radio-on; LT is the worst latency with a missed instance counting as its
/// max_duration; PHY statistics pool every successful reception.
FeatureVector extract_window(std::span<const GlossyRunResult> results, NodeId receiver,
                             const ExtractOptions& options = {});

/// Running mean / population variance (Welford).
class RunningStats {
public:
    void add(double x);
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 0 ? m2_ / static_cast<double>(n_) : 0.0; }
    double stddev() const;

private:
    std::size_t n_ = 0;
    double mean_ = 0;
    double m2_ = 0;
};

enum class RoadSetting : std::uint8_t { OffRoad, OnRoad };
std::string to_string(RoadSetting s);
RoadSetting parse_road_setting(const std::string& s);

struct ReliabilitySample {
    int txp = 0;
    RoadSetting setting = RoadSetting::OffRoad;
    double r = 0;
};

struct ReliabilityPoint {
    int txp = 0;
    RoadSetting setting = RoadSetting::OffRoad;
    std::size_t windows = 0;
    double mean_r = 0;
    double sd_r = 0;
};

/// Mean and spread of r per (setting, txp). Throws if a level has fewer than
/// min_windows samples.
std::vector<ReliabilityPoint> reliability_curve(std::span<const ReliabilitySample> samples,
                                                std::size_t min_windows = 100);

/// tc,lt_us,rxct,ro_us,r,rssi_avg_dbm,rssi_sd_db,lqi_avg,lqi_sd,hc,t_start_us,period,label
void write_features_csv(std::ostream& out, std::span<const FeatureVector> rows);
std::vector<FeatureVector> read_features_csv(std::istream& in);

// ---------------------------------------------------------------------------
// Per-instance trace rows, the raw input of replay.

struct TraceRow {
    std::int64_t period = 0;
    Micros window_start = 0;
    int instance = 0;
    Micros start = 0;
    Micros end = 0;
    Micros max_duration = 0;
    Micros slot = 0;
    int ntx = 0;
    int tc = 0;
    bool received = false;
    int rx_count = 0;
    std::optional<Micros> latency;
    Micros radio_on = 0;
    int hc = 0;
    std::vector<double> rssi;
    std::vector<double> lqi;
};

TraceRow to_trace_row(const GlossyRunResult& result, NodeId receiver, std::int64_t period, Micros window_start,
                      int instance, int hop_count);
/// Rebuilds a two-node result (initiator id 0, receiver id 1) carrying the
/// fields extract_window reads.
GlossyRunResult from_trace_row(const TraceRow& row);

void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows);
/// Throws on timestamps going backwards.
std::vector<TraceRow> read_trace_csv(std::istream& in);

} // namespace liver
