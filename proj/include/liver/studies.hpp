#pragma once

#include <span>
#include <string>
#include <vector>

#include "liver/metrics.hpp"
#include "liver/sim.hpp"
#include "liver/svm.hpp"

namespace liver {

/// Single roadside MP (two nodes, 12 m apart) with the default schedule.
ExperimentConfig roadside_config();

/// Multi-hop deployment. The sync flood has to cross tens of hops, so it uses
/// short slots, a longer sync window and a longer period; the measurement
/// gaps are widened to keep the timing chain satisfied.
ExperimentConfig wide_area_config(const Scenario& scenario);

struct TxpSweepConfig {
    int txp_min = 3;
    int txp_max = 31;
    int windows = 100;
    /// Plain flooding, as used for the power study.
    GlossyConfig flood{5, 4000, 3 * 4000, 40000, 31, false};
    Micros spacing = 500 * kMillis;
    TrafficParams traffic;
    LinkCalibration calibration;
    ObstructionModel obstruction;
    std::uint64_t seed = 1;
};

/// One reliability sample per window and power level. Window w at every level
/// and in both settings uses the same random stream, so settings are paired.
std::vector<ReliabilitySample> txp_sweep(const TxpSweepConfig& config, RoadSetting setting);

/// Feature rows of all MPs of an experiment, in MP order.
std::vector<FeatureVector> collect_rows(const ExperimentRecord& record);

struct PipelineResult {
    ConfusionMatrix confusion;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    SvmModel model;
};

/// Stratified split, training and evaluation in one call.
PipelineResult train_and_evaluate(std::span<const FeatureVector> rows, LabelView view, const SvmConfig& svm,
                                  std::span<const std::string> features, double train_fraction, std::uint64_t seed,
                                  Scoring scoring = Scoring::Exact);

struct HeadwayPoint {
    double headway_s = 0;
    std::size_t windows = 0;
    std::size_t test_size = 0;
    /// Fraction of correctly classified test windows.
    double accuracy = 0;
    double mean_class_accuracy = 0;
    ConfusionMatrix confusion;
};

/// Seven-class study over traffic densities. One experiment per headway (own
/// seed); a single model is trained on the union of the per-headway training
/// splits and scored on each headway's held-out windows. Classes too rare to
/// stratify at one headway are split as one pooled group. With four-class
/// scoring the seven-class model is judged against N, S, M, L.
std::vector<HeadwayPoint> headway_sweep(const ExperimentConfig& base, std::span<const double> headways,
                                        const SvmConfig& svm, std::span<const std::string> features,
                                        double train_fraction, Scoring scoring = Scoring::Exact);

/// Default classifier inputs.
const std::vector<std::string>& default_features();

} // namespace liver
