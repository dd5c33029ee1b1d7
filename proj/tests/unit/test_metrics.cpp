#include <cmath>
#include <sstream>

#include "doctest.h"
#include "liver/metrics.hpp"
#include "oracles.hpp"

using namespace liver;

namespace {

const std::vector<NodeId> kPair{0, 1};

GlossyRunResult flood(double p, const GlossyConfig& cfg, std::uint64_t seed, Micros start = 0) {
    DiscChannel ch({{0, 0}, {12, 0}}, 20, p);
    Rng rng(seed);
    return run_flood(kPair, 0, cfg, ch, start, rng);
}

/// Receiver-side result with hand-picked PHY samples.
GlossyRunResult synthetic(std::vector<double> rssi, std::vector<double> lqi) {
    GlossyRunResult r;
    r.initiator = 0;
    r.max_duration = 20000;
    r.slot_duration = 1000;
    r.ntx = static_cast<int>(rssi.size());
    r.nodes.resize(2);
    r.nodes[0].id = 0;
    r.nodes[0].initiator_timeout_count = 1;
    auto& rx = r.nodes[1];
    rx.id = 1;
    rx.rx_count = static_cast<int>(rssi.size());
    rx.received = rx.rx_count > 0;
    if (rx.received) rx.latency = 1000;
    rx.rssi = std::move(rssi);
    rx.lqi = std::move(lqi);
    return r;
}

} // namespace

TEST_CASE("unobstructed single instance") {
    const GlossyConfig cfg{5, 4000, 12000, 40000, 23, false};
    const std::vector<GlossyRunResult> one{flood(1.0, cfg, 1)};
    const auto fv = extract_window(one, 1);
    CHECK(fv.tc == 1);
    CHECK(fv.rxct == 5);
    CHECK(fv.r == 1);
    CHECK(fv.lt_us == 4000);
    CHECK(fv.ntx_total == 5);
    CHECK(fv.rssi_sd_db >= 0);
}

TEST_CASE("fully blocked single instance") {
    const GlossyConfig cfg{5, 4000, 12000, 40000, 23, false};
    const std::vector<GlossyRunResult> one{flood(0.0, cfg, 1)};
    ExtractOptions opt;
    opt.hop_count = 3;
    const auto fv = extract_window(one, 1, opt);
    CHECK(fv.r == 0);
    CHECK(fv.rxct == 0);
    CHECK(fv.lt_us == 40000);
    CHECK(fv.rssi_avg_dbm == opt.rssi_sentinel_dbm);
    CHECK(fv.rssi_sd_db == 0);
    CHECK(fv.lqi_avg == opt.lqi_sentinel);
    CHECK(fv.hc == 3);
    CHECK_THROWS_AS(extract_window({}, 1), Error);
}

TEST_CASE("feature invariants over random windows") {
    const GlossyConfig cfg{1, 1000, 3000, 20000, 23, true};
    Rng pick(4);
    for (int w = 0; w < 300; ++w) {
        std::vector<GlossyRunResult> inst;
        const int ni = 1 + w % 4;
        for (int i = 0; i < ni; ++i)
            inst.push_back(flood(uniform01(pick), cfg, static_cast<std::uint64_t>(w * 10 + i), i * 100000));
        const auto fv = extract_window(inst, 1);
        CHECK(fv.rxct <= fv.ntx_total);
        CHECK(fv.r >= 0);
        CHECK(fv.r <= 1);
        CHECK(fv.rssi_sd_db >= 0);
        CHECK(fv.lqi_sd >= 0);
        if (fv.r == 1) CHECK(fv.lt_us < cfg.max_duration);
        if (fv.r == 0) CHECK(fv.rxct == 0);
        CHECK(extract_window(inst, 1) == fv);
    }
}

TEST_CASE("pooled statistics equal a two-pass reference") {
    Rng rng(6);
    std::normal_distribution<double> n(-80, 3);
    std::vector<GlossyRunResult> inst;
    std::vector<double> all_rssi, all_lqi;
    for (int i = 0; i < 4; ++i) {
        std::vector<double> r, l;
        for (int k = 0; k < 1 + i; ++k) {
            r.push_back(n(rng));
            l.push_back(100 + n(rng) + 80);
        }
        all_rssi.insert(all_rssi.end(), r.begin(), r.end());
        all_lqi.insert(all_lqi.end(), l.begin(), l.end());
        inst.push_back(synthetic(r, l));
    }
    const auto fv = extract_window(inst, 1);
    const double ref = oracle::two_pass_sd(all_rssi);
    CHECK(std::abs(fv.rssi_sd_db - ref) <= 1e-9 * ref);
    CHECK(std::abs(fv.lqi_sd - oracle::two_pass_sd(all_lqi)) <= 1e-9 * oracle::two_pass_sd(all_lqi));

    // Large offset, small spread: the naive sum-of-squares formula loses digits here.
    RunningStats s;
    std::vector<double> xs;
    for (int i = 0; i < 10000; ++i) {
        xs.push_back(1e6 + n(rng) * 1e-3);
        s.add(xs.back());
    }
    const double sd = oracle::two_pass_sd(xs);
    CHECK(std::abs(s.stddev() - sd) <= 1e-6 * sd);
}

TEST_CASE("reliability curve grouping") {
    std::vector<ReliabilitySample> s;
    for (int i = 0; i < 100; ++i) {
        s.push_back({25, RoadSetting::OffRoad, 1.0});
        s.push_back({5, RoadSetting::OffRoad, i % 4 == 0 ? 1.0 : 0.0});
        s.push_back({5, RoadSetting::OnRoad, 0.0});
    }
    const auto c = reliability_curve(s);
    REQUIRE(c.size() == 3);
    for (const auto& p : c) {
        CHECK(p.windows == 100);
        if (p.txp == 25) CHECK(p.mean_r == 1.0);
        if (p.txp == 5 && p.setting == RoadSetting::OffRoad) CHECK(p.mean_r == doctest::Approx(0.25));
    }
    s.push_back({7, RoadSetting::OnRoad, 1.0});
    CHECK_THROWS_WITH_AS(reliability_curve(s), "insufficient samples at TXP 7 (on-road): 1 < 100", Error);
}

TEST_CASE("feature CSV round-trip") {
    std::vector<FeatureVector> rows(3);
    rows[0].tc = 1;
    rows[0].lt_us = 1000;
    rows[0].rssi_avg_dbm = -74.123456789012345;
    rows[0].rssi_sd_db = 0.1 + 0.2;
    rows[0].label = Label::N;
    rows[1].r = 1.0 / 3.0;
    rows[1].period = 7;
    rows[1].t_start_us = 3500000;
    rows[1].label = Label::MMix;
    rows[2].hc = 4;
    std::stringstream ss;
    write_features_csv(ss, rows);
    std::string header;
    std::getline(std::istringstream(ss.str()), header);
    CHECK(header == "tc,lt_us,rxct,ro_us,r,rssi_avg_dbm,rssi_sd_db,lqi_avg,lqi_sd,hc,t_start_us,period,label");
    const auto back = read_features_csv(ss);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        auto expect = rows[i];
        expect.ntx_total = back[i].ntx_total;
        CHECK(back[i] == expect);
    }
    CHECK_FALSE(back[2].label);

    std::istringstream wrong("tc,lt_us,rxct,ro_us,r,rssi,rssi_sd_db,lqi_avg,lqi_sd,hc,t_start_us,period,label\n");
    CHECK_THROWS_WITH_AS(read_features_csv(wrong),
                         "line 1: header mismatch in column 6: expected 'rssi_avg_dbm', found 'rssi'", Error);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_features_csv(empty), Error);
}

TEST_CASE("trace rows round-trip and rebuild the same features") {
    const GlossyConfig cfg{1, 1000, 3000, 20000, 23, true};
    std::vector<GlossyRunResult> inst;
    std::vector<TraceRow> rows;
    for (int i = 0; i < 4; ++i) {
        inst.push_back(flood(i == 2 ? 0.0 : 0.8, cfg, 30 + i, 60000 + i * 100000));
        rows.push_back(to_trace_row(inst.back(), 1, 0, 60000, i, 1));
    }
    std::stringstream ss;
    write_trace_csv(ss, rows);
    const auto back = read_trace_csv(ss);
    REQUIRE(back.size() == 4);
    std::vector<GlossyRunResult> rebuilt;
    for (const auto& r : back) rebuilt.push_back(from_trace_row(r));
    ExtractOptions opt;
    opt.hop_count = 1;
    CHECK(extract_window(rebuilt, 1, opt) == extract_window(inst, 1, opt));

    std::stringstream swapped;
    auto r2 = rows;
    std::swap(r2[1], r2[3]);
    write_trace_csv(swapped, r2);
    CHECK_THROWS_AS(read_trace_csv(swapped), Error);
}
