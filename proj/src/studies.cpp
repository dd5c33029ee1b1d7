#include "liver/studies.hpp"

#include <map>

namespace liver {

ExperimentConfig roadside_config() {
    ExperimentConfig c;
    c.scenario.name = "custom";
    c.scenario.width_m = 100;
    c.scenario.height_m = 100;
    c.scenario.mp_count = 1;
    c.scenario.fn_count = 0;
    return c;
}

ExperimentConfig wide_area_config(const Scenario& scenario) {
    ExperimentConfig c;
    c.scenario = scenario;
    auto& s = c.schedule;
    s.gp = 1000 * kMillis;
    s.t_sc = 150 * kMillis;
    s.t_sc_gap = s.gp - s.t_sc;
    s.t_dc = 20 * kMillis;
    s.t_dc_gap = 140 * kMillis;
    s.t_scdc_gap = 20 * kMillis;
    s.d_x = 60 * kMillis;
    c.sc.slot = 1000;
    c.sc.ntx = 3;
    c.chaos.slot_duration = 1000;
    c.chaos.idle_timeout = 3000;
    c.chaos.max_duration = 2 * kSeconds;
    c.periods = 20;
    return c;
}

std::vector<ReliabilitySample> txp_sweep(const TxpSweepConfig& config, RoadSetting setting) {
    if (config.txp_min < kMinTxp || config.txp_max > kMaxTxp || config.txp_min > config.txp_max)
        throw Error("txp sweep range must lie within [0, 31]");
    if (config.windows < 1) throw Error("txp sweep needs at least one window per level");
    config.flood.validate();
    if (config.spacing < config.flood.max_duration) throw Error("window spacing shorter than one flood");

    Scenario sc;
    sc.width_m = 100;
    sc.height_m = 100;
    const Topology topo = make_grid(sc);
    RadioChannel channel(topo, LinkModel(config.calibration, config.obstruction));
    GroundTruthLog truth;
    if (setting == RoadSetting::OnRoad) {
        Rng rng(derive_seed(config.seed, stream::kTraffic, 0));
        const Micros horizon = static_cast<Micros>(config.windows) * config.spacing;
        truth = generate_traffic(to_seconds(horizon), config.traffic.mean_headway_s, config.traffic.class_mix, rng,
                                 config.traffic.config);
        channel.set_traffic(0, &truth);
    }
    const std::array<NodeId, 2> pair{topo.mps[0].initiator, topo.mps[0].receiver};
    std::vector<ReliabilitySample> out;
    for (int txp = config.txp_min; txp <= config.txp_max; ++txp) {
        GlossyConfig g = config.flood;
        g.txp = txp;
        for (int w = 0; w < config.windows; ++w) {
            Rng rng(derive_seed(config.seed, stream::kMeasure, 0, static_cast<std::uint64_t>(w)));
            const auto res = run_flood(pair, pair[0], g, channel, w * config.spacing, rng);
            out.push_back({txp, setting, res.at(pair[1]).received ? 1.0 : 0.0});
        }
    }
    return out;
}

std::vector<FeatureVector> collect_rows(const ExperimentRecord& record) {
    std::vector<FeatureVector> rows;
    for (const auto& mp : record.mps) rows.insert(rows.end(), mp.session.rows.begin(), mp.session.rows.end());
    return rows;
}

PipelineResult train_and_evaluate(std::span<const FeatureVector> rows, LabelView view, const SvmConfig& svm,
                                  std::span<const std::string> features, double train_fraction, std::uint64_t seed,
                                  Scoring scoring) {
    const Dataset data = make_dataset(rows, features, view);
    auto [train_set, test_set] = split(data, train_fraction, seed);
    PipelineResult r;
    r.train_size = train_set.size();
    r.test_size = test_set.size();
    r.model = train(train_set, svm);
    r.confusion = evaluate(r.model, test_set, scoring);
    return r;
}

std::vector<HeadwayPoint> headway_sweep(const ExperimentConfig& base, std::span<const double> headways,
                                        const SvmConfig& svm, std::span<const std::string> features,
                                        double train_fraction, Scoring scoring) {
    std::vector<Dataset> tests;
    Dataset pooled;
    pooled.feature_names.assign(features.begin(), features.end());
    std::vector<HeadwayPoint> points;
    for (std::size_t k = 0; k < headways.size(); ++k) {
        ExperimentConfig cfg = base;
        cfg.traffic.mean_headway_s = headways[k];
        cfg.seed = derive_seed(base.seed, 0x68656164ULL, k);
        const auto rows = collect_rows(run_experiment(cfg));
        const Dataset data = make_dataset(rows, features, LabelView::SevenClass);

        std::map<std::string, std::size_t> counts;
        for (const auto& l : data.y) ++counts[l];
        std::vector<std::string> keys;
        for (const auto& l : data.y) keys.push_back(counts[l] >= 2 ? l : std::string("*rare"));
        const auto [tr, te] = split_indices(keys, train_fraction, derive_seed(cfg.seed, 0x73706c6974ULL));
        Dataset test;
        test.feature_names = data.feature_names;
        for (auto i : tr) pooled.push(data.x[i], data.y[i]);
        for (auto i : te) test.push(data.x[i], data.y[i]);
        HeadwayPoint hp;
        hp.headway_s = headways[k];
        hp.windows = data.size();
        hp.test_size = test.size();
        points.push_back(hp);
        tests.push_back(std::move(test));
    }
    const SvmModel model = train(pooled, svm);
    for (std::size_t k = 0; k < points.size(); ++k) {
        points[k].confusion = evaluate(model, tests[k], scoring);
        points[k].accuracy = points[k].confusion.overall_accuracy();
        points[k].mean_class_accuracy = points[k].confusion.mean_accuracy();
    }
    return points;
}

const std::vector<std::string>& default_features() { return feature_names(); }

} // namespace liver
