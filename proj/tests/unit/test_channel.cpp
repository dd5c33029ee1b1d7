#include <cmath>

#include "doctest.h"
#include "liver/channel.hpp"

using namespace liver;

namespace {

double rate(const LinkModel& m, double dbm, int draws, std::uint64_t seed) {
    Rng rng(seed);
    int ok = 0;
    for (int i = 0; i < draws; ++i) ok += m.sample_reception(dbm, rng).received;
    return static_cast<double>(ok) / draws;
}

} // namespace

TEST_CASE("power anchors and interpolation") {
    const LinkModel m;
    CHECK(m.received_power(31, 12) == doctest::Approx(-66.0));
    CHECK(m.received_power(3, 12) == doctest::Approx(-98.0));
    CHECK(m.reference_power(17) == doctest::Approx(-82.0));
    for (int t = 1; t <= 31; ++t) CHECK(m.reference_power(t) > m.reference_power(t - 1));
    const std::vector<Obstruction> truck{{SizeClass::L, 1.0}};
    CHECK(m.received_power(31, 12, truck) == doctest::Approx(-96.0));
    const std::vector<Obstruction> half{{SizeClass::M, 0.5}};
    CHECK(m.received_power(31, 12, half) == doctest::Approx(-75.0));
    CHECK(m.received_power(31, 24) < m.received_power(31, 12));
    CHECK_THROWS_WITH_AS(m.received_power(32, 12), "unknown power index 32", Error);
    CHECK_THROWS_AS(m.received_power(-1, 12), Error);
    CHECK_THROWS_AS(m.received_power(31, 0), Error);
}

TEST_CASE("calibration validation") {
    LinkCalibration c;
    c.txp_to_rxpower = {{3, -60.0}, {31, -70.0}};
    CHECK_THROWS_AS(c.validate(), Error);
    ObstructionModel o;
    o.attenuation_db = {20, 10, 30};
    CHECK_THROWS_AS(o.validate(), Error);
    o.attenuation_db = {0, 10, 30};
    CHECK_THROWS_AS(o.validate(), Error);
}

TEST_CASE("reception rates at the curve's landmarks") {
    const LinkModel m;
    CHECK(rate(m, m.calibration().noise_floor_dbm - 20, 10000, 1) <= 0.001);
    CHECK(rate(m, -66.0, 10000, 2) > 0.99);
    CHECK(m.prr(m.prr_midpoint()) == doctest::Approx(0.5));
    CHECK(std::abs(rate(m, m.prr_midpoint(), 10000, 3) - 0.5) <= 0.02);
}

TEST_CASE("empirical reception rate is monotone in power") {
    const LinkModel m;
    double prev = 0;
    for (double p = -105; p <= -80; p += 1) {
        const double r = rate(m, p, 10000, static_cast<std::uint64_t>(p + 200));
        CHECK(prev <= r + 0.01);
        prev = r;
    }
}

TEST_CASE("sampled RSSI is centred on the received power; LQI stays in range") {
    const LinkModel m;
    Rng rng(5);
    for (double p : {-95.0, -80.0, -66.0}) {
        double sum = 0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            const auto r = m.sample_reception(p, rng);
            sum += r.rssi_dbm;
            CHECK(r.lqi >= kLqiMin);
            CHECK(r.lqi <= kLqiMax);
        }
        CHECK(std::abs(sum / n - p) < 0.2);
    }
}

TEST_CASE("sample_reception always consumes the same number of variates") {
    const LinkModel m;
    Rng a(9), b(9);
    m.sample_reception(-200, a);
    m.sample_reception(-10, b);
    CHECK(a() == b());
}

TEST_CASE("obstruction ordering") {
    const LinkModel m;
    const int txp = 23;
    auto prr_with = [&](std::optional<SizeClass> c) {
        std::vector<Obstruction> o;
        if (c) o.push_back({*c, 1.0});
        return rate(m, m.received_power(txp, 12, o), 10000, 11);
    };
    const double none = prr_with(std::nullopt), s = prr_with(SizeClass::S), md = prr_with(SizeClass::M),
                 l = prr_with(SizeClass::L);
    CHECK(l <= md);
    CHECK(md <= s);
    CHECK(s <= none);
    CHECK(none > 0.99);
}

TEST_CASE("capture resolution") {
    const LinkModel m;
    SUBCASE("single transmitter reduces to sample_reception") {
        for (double p : {-100.0, -93.0, -70.0}) {
            Rng a(21), b(21);
            const Signal one{4, p, 1};
            for (int i = 0; i < 200; ++i) {
                const auto cap = m.capture_resolve(std::span(&one, 1), a);
                const auto ref = m.sample_reception(p, b);
                REQUIRE(cap.has_value() == ref.received);
                if (cap) {
                    CHECK(cap->transmitter == 4);
                    CHECK(cap->reception.rssi_dbm == ref.rssi_dbm);
                    CHECK(cap->reception.lqi == ref.lqi);
                }
            }
        }
    }
    SUBCASE("identical content combines on the strongest copy") {
        const std::vector<Signal> sig{{1, -90.0, 7}, {2, -94.0, 7}, {3, -93.0, 7}};
        const double want = m.prr(-90.0);
        Rng rng(4);
        int ok = 0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) ok += m.capture_resolve(sig, rng).has_value();
        CHECK(std::abs(static_cast<double>(ok) / n - want) <= 0.02);
        const std::vector<Signal> pair{{1, -70.0, 7}, {2, -90.0, 7}};
        ok = 0;
        for (int i = 0; i < n; ++i) ok += m.capture_resolve(pair, rng).has_value();
        CHECK(std::abs(static_cast<double>(ok) / n - m.prr(-70.0)) <= 0.02);
    }
    SUBCASE("distinct content below the margin is lost") {
        const std::vector<Signal> sig{{1, -70.0, 1}, {2, -71.0, 2}};
        Rng rng(1);
        for (int i = 0; i < 100; ++i) CHECK_FALSE(m.capture_resolve(sig, rng));
    }
    SUBCASE("distinct content above the margin captures the strongest") {
        const std::vector<Signal> sig{{1, -75.0, 1}, {2, -66.0, 2}};
        Rng rng(1);
        const auto cap = m.capture_resolve(sig, rng);
        REQUIRE(cap);
        CHECK(cap->transmitter == 2);
        CHECK(cap->content == 2);
    }
    SUBCASE("nothing to decode") {
        Rng rng(1);
        CHECK_FALSE(m.capture_resolve({}, rng));
    }
}
