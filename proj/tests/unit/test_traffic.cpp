#include <cmath>
#include <sstream>

#include "doctest.h"
#include "liver/traffic.hpp"
#include "oracles.hpp"

using namespace liver;

namespace {

Vehicle car(std::uint32_t id, SizeClass c, double arrival_s, double length, double speed) {
    Vehicle v;
    v.id = id;
    v.size = c;
    v.arrival = from_seconds(arrival_s);
    v.length_m = length;
    v.speed_mps = speed;
    return v;
}

std::vector<oracle::Span> spans(const GroundTruthLog& log) {
    std::vector<oracle::Span> out;
    for (std::size_t i = 0; i < log.size(); ++i) {
        const auto& v = log.vehicles()[i];
        out.push_back({v.arrival, v.arrival + log.contact(i), static_cast<int>(v.size)});
    }
    return out;
}

} // namespace

TEST_CASE("contact period examples") {
    CHECK(contact_period(car(0, SizeClass::S, 0, 3.8, 16), 0.2) == 250000);
    CHECK(contact_period(car(0, SizeClass::L, 0, 12, 8), 0.2) == 1525000);
    const auto slow = contact_period(car(0, SizeClass::M, 0, 5.0, 10), 0.2);
    const auto fast = contact_period(car(0, SizeClass::M, 0, 5.0, 20), 0.2);
    CHECK(slow == 2 * fast);
    CHECK_THROWS_WITH_AS(contact_period(car(0, SizeClass::S, 0, 3, 0), 0.2), "vehicle speed must be > 0", Error);
}

TEST_CASE("vehicle count follows the mean headway") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng rng(seed);
        const auto log = generate_traffic(600, 3, {0.5, 0.3, 0.2}, rng);
        CHECK(log.size() >= 170);
        CHECK(log.size() <= 230);
    }
}

TEST_CASE("generated logs respect the class and ordering invariants") {
    Rng rng(8);
    const TrafficConfig cfg;
    const auto log = generate_traffic(3600, 2, {0.4, 0.4, 0.2}, rng, cfg);
    REQUIRE(log.size() > 1000);
    std::array<int, 3> count{};
    double gaps = 0;
    for (std::size_t i = 0; i < log.size(); ++i) {
        const auto& v = log.vehicles()[i];
        const auto& spec = cfg.classes[static_cast<std::size_t>(v.size)];
        ++count[static_cast<std::size_t>(v.size)];
        CHECK(v.length_m >= spec.length_min_m);
        CHECK(v.length_m <= spec.length_max_m);
        CHECK(v.speed_mps > 0);
        CHECK(v.speed_mps <= spec.speed_max_mps);
        CHECK(log.contact(i) >= from_seconds(cfg.min_contact_period_s) - 1);
        if (i > 0) {
            CHECK(v.arrival >= log.vehicles()[i - 1].arrival);
            const double g = to_seconds(v.arrival - log.vehicles()[i - 1].arrival);
            CHECK(g >= cfg.min_gap_s - 1e-6);
            gaps += g;
        }
    }
    CHECK(gaps / static_cast<double>(log.size() - 1) == doctest::Approx(2.0).epsilon(0.08));
    CHECK(count[0] / static_cast<double>(log.size()) == doctest::Approx(0.4).epsilon(0.1));
    CHECK(count[2] / static_cast<double>(log.size()) == doctest::Approx(0.2).epsilon(0.15));
}

TEST_CASE("class mix must be a distribution") {
    Rng rng(1);
    CHECK_THROWS_WITH_AS(generate_traffic(60, 3, {0.5, 0.5, 0.5}, rng), "class_mix must sum to 1 (got 1.5)", Error);
    CHECK_THROWS_AS(generate_traffic(60, 3, {1.2, -0.2, 0}, rng), Error);
    CHECK_THROWS_AS(generate_traffic(60, 0, {1, 0, 0}, rng), Error);
    const auto only_s = generate_traffic(600, 3, {1, 0, 0}, rng);
    REQUIRE(only_s.size() > 0);
    for (const auto& v : only_s.vehicles()) CHECK(v.size == SizeClass::S);
}

TEST_CASE("dense traffic overlaps often") {
    Rng rng(4);
    const auto log = generate_traffic(600, 0.25, {0.5, 0.3, 0.2}, rng);
    const auto sp = spans(log);
    // Window scan with the brute-force labeller.
    int occupied = 0, overlapped = 0;
    for (Micros t = 0; t < from_seconds(600); t += 100 * kMillis) {
        const int l = oracle::brute_label(sp, t, t + 100 * kMillis);
        if (l != 0) ++occupied;
        if (l >= 4) ++overlapped;
    }
    CHECK(static_cast<double>(overlapped) / occupied > 0.2);
    // Time-weighted view from an interval sweep.
    CHECK(static_cast<double>(oracle::covered_at_least(sp, 2)) / oracle::covered_at_least(sp, 1) > 0.2);
}

TEST_CASE("occupancy agrees with an interval sweep") {
    Rng rng(12);
    const auto log = generate_traffic(300, 1.0, {0.5, 0.3, 0.2}, rng);
    const auto sp = spans(log);
    Micros one = 0, two = 0;
    const Micros step = 1000;
    for (Micros t = 0; t < from_seconds(310); t += step) {
        const auto occ = occupancy(log, t);
        if (occ.size() >= 1) one += step;
        if (occ.size() >= 2) two += step;
    }
    // Sampling at 1 ms resolves each interval edge to within one step.
    CHECK(std::llabs(one - oracle::covered_at_least(sp, 1)) <= static_cast<Micros>(2 * sp.size()) * step);
    CHECK(std::llabs(two - oracle::covered_at_least(sp, 2)) <= static_cast<Micros>(2 * sp.size()) * step);
}

TEST_CASE("occupancy examples") {
    const GroundTruthLog log({car(0, SizeClass::M, 1.0, 5.0, 10.0)}, 3, 0.2);
    CHECK(occupancy(log, 0).empty());
    const auto one = occupancy(log, from_seconds(1.2));
    REQUIRE(one.size() == 1);
    CHECK(one[0].id == 0);
    CHECK(one[0].size == SizeClass::M);
    CHECK(occupancy(log, from_seconds(1.52)).empty());
}

TEST_CASE("label examples") {
    const GroundTruthLog log({car(0, SizeClass::L, 1.0, 12, 10), car(1, SizeClass::M, 5.0, 5, 10),
                              car(2, SizeClass::S, 5.2, 3, 10), car(3, SizeClass::S, 9.0, 3, 10),
                              car(4, SizeClass::S, 9.1, 3, 10)},
                             3, 0.2);
    const auto s = [](double x) { return from_seconds(x); };
    CHECK(label_window(log, s(0), s(0.5), LabelMode::SevenClass) == Label::N);
    CHECK(label_window(log, s(0), s(0.5), LabelMode::FourClass) == Label::N);
    CHECK(label_window(log, s(1.5), s(1.6), LabelMode::FourClass) == Label::L);
    CHECK(label_window(log, s(5.25), s(5.3), LabelMode::SevenClass) == Label::MMix);
    CHECK(label_window(log, s(9.15), s(9.2), LabelMode::SevenClass) == Label::SMix);
    CHECK(label_window(log, s(0), s(6), LabelMode::SevenClass) == Label::LMix);
    CHECK_THROWS_AS(label_window(log, s(5.25), s(5.3), LabelMode::FourClass), MixedWindowError);
    CHECK_THROWS_AS(label_window(log, s(2), s(2), LabelMode::SevenClass), Error);
    // Touching the end of an occupancy interval is not an overlap.
    CHECK(label_window(log, s(1) + log.contact(0), s(4), LabelMode::FourClass) == Label::N);
    const std::vector<Interval> parts{{s(1.5), s(1.6)}, {s(5.25), s(5.3)}};
    CHECK(label_intervals(log, parts, LabelMode::SevenClass) == Label::LMix);
    CHECK(base_of(Label::LMix) == Label::L);
    CHECK(base_of(Label::N) == Label::N);
    for (Label l : {Label::N, Label::S, Label::M, Label::L, Label::SMix, Label::MMix, Label::LMix})
        CHECK(parse_label(to_string(l)) == l);
}

TEST_CASE("seven-class labels match a brute-force classifier on random windows") {
    Rng rng(77);
    const auto log = generate_traffic(900, 0.6, {0.4, 0.35, 0.25}, rng);
    const auto sp = spans(log);
    std::uniform_int_distribution<Micros> start(0, from_seconds(900));
    std::uniform_int_distribution<Micros> len(1, from_seconds(2));
    for (int i = 0; i < 10000; ++i) {
        const Micros t0 = start(rng), t1 = t0 + len(rng);
        const Label l = label_window(log, t0, t1, LabelMode::SevenClass);
        CHECK(static_cast<int>(l) == oracle::brute_label(sp, t0, t1));
        CHECK(label_window(log, t0, t1, LabelMode::SevenClass) == l);
        if (!is_mix(l)) {
            CHECK(label_window(log, t0, t1, LabelMode::FourClass) == l);
        } else {
            CHECK_THROWS_AS(label_window(log, t0, t1, LabelMode::FourClass), MixedWindowError);
        }
    }
}

TEST_CASE("ground truth CSV round-trip") {
    Rng rng(3);
    const auto log = generate_traffic(120, 2, {0.5, 0.3, 0.2}, rng);
    std::stringstream ss;
    write_ground_truth_csv(ss, log);
    const auto back = read_ground_truth_csv(ss, log.corridor_width_m(), log.mean_headway_s());
    REQUIRE(back.size() == log.size());
    for (std::size_t i = 0; i < log.size(); ++i) {
        CHECK(back.vehicles()[i].arrival == log.vehicles()[i].arrival);
        CHECK(back.vehicles()[i].speed_mps == log.vehicles()[i].speed_mps);
        CHECK(back.vehicles()[i].length_m == log.vehicles()[i].length_m);
        CHECK(back.vehicles()[i].size == log.vehicles()[i].size);
        CHECK(back.contact(i) == log.contact(i));
    }
    std::istringstream bad("id,class,arrival_s,speed_mps,length_m\n0,S,2.0,10,3\n1,M,1.0,10,5\n");
    CHECK_THROWS_WITH_AS(read_ground_truth_csv(bad, 0.2), "line 3: arrival_s must be non-decreasing", Error);
    std::istringstream header("id,kind,arrival_s,speed_mps,length_m\n");
    CHECK_THROWS_AS(read_ground_truth_csv(header, 0.2), Error);
}
