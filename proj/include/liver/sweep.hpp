#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "liver/studies.hpp"

namespace liver {

enum class SweepAxis : std::uint8_t { Txp, Headway, Gp, Strategy, MpCount, FnCount };
std::string to_string(SweepAxis a);
SweepAxis parse_sweep_axis(const std::string& s);

struct ClassifierConfig {
    SvmConfig svm;
    LabelView view = LabelView::Detection;
    Scoring scoring = Scoring::Exact;
    std::vector<std::string> features = feature_names();
    double train_fraction = 0.8;

    void validate() const;
};

/// Power study settings; channel and traffic come from the experiment.
struct TxpStudy {
    int windows = 100;
    GlossyConfig flood{5, 4000, 3 * 4000, 40000, 31, false};
    Micros spacing = 500 * kMillis;
    std::vector<RoadSetting> settings{RoadSetting::OffRoad, RoadSetting::OnRoad};
};

struct SweepSpec {
    SweepAxis axis = SweepAxis::Headway;
    /// Numeric axes: txp index, headway (s), gp (s), MP count or FN count.
    std::vector<double> values{4, 3, 2, 1, 0.75, 0.5, 0.25};
    /// Strategy axis only.
    std::vector<Strategy> strategies;
};

/// Everything one CLI run needs.
struct RunConfig {
    /// "roadside" or "wide-area"; selects the base experiment before overrides.
    std::string preset = "roadside";
    ExperimentConfig experiment = roadside_config();
    ClassifierConfig classifier;
    TxpStudy txp;
    SweepSpec sweep;
    std::vector<std::uint64_t> seeds{1};
    std::string output_dir = "out";
    /// Also write per-point feature files, traces and ground truth.
    bool emit_data = false;

    void validate() const;
};

/// One (point, seed) measurement. `group` separates sub-series of a point
/// (the road setting of the power study); empty otherwise.
struct SweepRecord {
    std::string value;
    std::string group;
    std::uint64_t seed = 0;
    std::vector<double> metrics;
};

/// Raw data behind one record, kept only when emit_data is set.
struct PointData {
    std::string tag;
    std::vector<FeatureVector> features;
    /// Per MP.
    std::vector<std::vector<TraceRow>> traces;
    std::vector<GroundTruthLog> truths;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::Headway;
    std::vector<std::string> metric_names;
    std::vector<SweepRecord> records;
    std::vector<PointData> data;
};

struct SummaryRow {
    std::string value;
    std::string group;
    std::size_t n = 0;
    std::vector<double> mean;
    std::vector<double> stddev;
};

/// Metric columns recorded for an axis.
const std::vector<std::string>& sweep_metric_names(SweepAxis axis);

/// Text of a sweep value as used in CSV rows and file names.
std::string format_value(SweepAxis axis, double v);

/// Runs every (value, seed) point on up to `jobs` threads. Records are ordered
/// by value, group, then seed regardless of the number of workers.
/// `on_point` is called (serialised) after each unit of work finishes.
SweepResult run_sweep(const RunConfig& config, int jobs = 1,
                      const std::function<void(const SweepRecord&)>& on_point = {});

/// Per (value, group): mean and sample standard deviation over seeds.
std::vector<SummaryRow> summarize(const SweepResult& result);

void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_summary_csv(std::ostream& out, const SweepResult& result, std::span<const SummaryRow> rows);

/// Experiment config of one numeric/strategy point, as run_sweep builds it.
ExperimentConfig point_config(const RunConfig& config, double value, std::uint64_t seed);

} // namespace liver
