#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "liver/svm.hpp"
#include "oracles.hpp"

using namespace liver;

namespace {

double train_accuracy(const SvmModel& m, const Dataset& d) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < d.size(); ++i) ok += predict(m, d.x[i]).label == d.y[i];
    return static_cast<double>(ok) / static_cast<double>(d.size());
}

Dataset xor_data(Rng& rng) {
    Dataset d;
    d.feature_names = {"a", "b"};
    std::normal_distribution<double> n(0, 0.2);
    for (int i = 0; i < 200; ++i) {
        const double sx = (i % 2) ? 1 : -1, sy = (i % 4 < 2) ? 1 : -1;
        d.push({sx + n(rng), sy + n(rng)}, sx * sy > 0 ? "P" : "Q");
    }
    return d;
}

/// One-dimensional clusters at 0, 10, 20, ... per label.
Dataset clusters(const std::vector<std::string>& labels, int per_class, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> n(0, 1);
    Dataset d;
    d.feature_names = {"f", "g"};
    for (int i = 0; i < per_class; ++i)
        for (std::size_t k = 0; k < labels.size(); ++k) d.push({10.0 * static_cast<double>(k) + n(rng), n(rng)}, labels[k]);
    return d;
}

} // namespace

TEST_CASE("dual solver reproduces a closed-form two-point solution") {
    const Matrix x{{0, 0}, {2, 2}};
    const std::vector<int> y{-1, 1};
    const std::vector<double> c{100, 100};
    const auto s = solve_binary(x, y, c, Kernel{KernelKind::Linear, 0}, 1e-8, 100000);
    REQUIRE(s.w.size() == 2);
    CHECK(s.w[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(s.w[1] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(s.bias == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(s.gap() <= 1e-6);
    CHECK_THROWS_AS(solve_binary(x, std::vector<int>{1, 1}, c, Kernel{}, 1e-4, 1000), Error);
}

TEST_CASE("separable blobs: full training accuracy and the max-margin direction") {
    // Class A on x <= -1, class B on x >= +1, mirrored in y: the widest
    // separating strip is x = 0, so the analytic normal is (1, 0).
    Rng rng(2);
    std::uniform_real_distribution<double> yy(-3, 3), extra(0, 2);
    Dataset d;
    d.feature_names = {"x", "y"};
    for (int i = 0; i < 40; ++i) {
        const double v = yy(rng), e = (i % 3 == 0) ? 0 : extra(rng);
        d.push({-1 - e, v}, "A");
        d.push({1 + e, v}, "B");
    }
    SvmConfig cfg;
    cfg.kernel = KernelKind::Linear;
    cfg.c = 1;
    const auto m = train(d, cfg);
    CHECK(train_accuracy(m, d) == 1.0);
    REQUIRE(m.machines.size() == 1);
    const auto& w = m.machines[0].w;
    // Back to raw units.
    const double wx = w[0] / m.scaler.sd[0], wy = w[1] / m.scaler.sd[1];
    const double angle = std::atan2(std::abs(wy), std::abs(wx)) * 180 / std::numbers::pi;
    CHECK(angle < 5.0);
    CHECK(wx > 0);
}

TEST_CASE("XOR needs a non-linear kernel") {
    Rng rng(3);
    const auto d = xor_data(rng);
    SvmConfig rbf;
    rbf.c = 10;
    CHECK(train_accuracy(train(d, rbf), d) >= 0.95);
    SvmConfig lin = rbf;
    lin.kernel = KernelKind::Linear;
    CHECK(train_accuracy(train(d, lin), d) <= 0.75);
}

TEST_CASE("primal objective matches a brute-force minimiser") {
    Rng rng(11);
    for (int inst = 0; inst < 15; ++inst) {
        const int n = std::uniform_int_distribution<int>(10, 40)(rng);
        const double cval = std::array<double, 3>{0.1, 1.0, 10.0}[inst % 3];
        std::normal_distribution<double> g(0, 1);
        Matrix x;
        std::vector<int> y;
        for (int i = 0; i < n; ++i) {
            const int s = (i % 2) ? 1 : -1;
            x.push_back({s * 0.8 + g(rng), s * 0.4 + g(rng)});
            y.push_back(s);
        }
        const std::vector<double> c(static_cast<std::size_t>(n), cval);
        const auto sol = solve_binary(x, y, c, Kernel{KernelKind::Linear, 0}, 1e-6, 10000000);
        const double smo = primal_objective(x, y, c, sol.w, sol.bias);
        const double ref = oracle::PrimalSvm(x, y, c).solve();
        CHECK(smo <= ref * 1.01);
        CHECK(ref <= smo * 1.01);
    }
}

TEST_CASE("scaler standardises kept features and drops constant ones") {
    Rng rng(4);
    std::normal_distribution<double> g(5, 3);
    Dataset d;
    d.feature_names = {"a", "const", "b"};
    for (int i = 0; i < 500; ++i) d.push({g(rng), 7.0, 1e5 + 1e-2 * g(rng)}, "X");
    const auto s = Scaler::fit(d);
    CHECK(s.kept == std::vector<std::string>{"a", "b"});
    CHECK(s.dropped == std::vector<std::string>{"const"});
    for (std::size_t k = 0; k < 2; ++k) {
        std::vector<double> col;
        for (const auto& row : d.x) col.push_back(s.transform(row)[k]);
        double mean = 0;
        for (double v : col) mean += v;
        mean /= static_cast<double>(col.size());
        // column b sits at 1e5 with sd 0.03: centring costs ~1e-10 per element
        CHECK(std::abs(mean) < 1e-8);
        CHECK(std::abs(oracle::two_pass_sd(col) - 1.0) < 1e-9);
    }
}

TEST_CASE("training preconditions") {
    auto d = clusters({"A"}, 20, 1);
    CHECK_THROWS_WITH_AS(train(d), "training needs at least two classes (got 1)", Error);
    d = clusters({"A", "B"}, 9, 1);
    CHECK_THROWS_AS(train(d), Error);
    d = clusters({"A", "B"}, 20, 1);
    const auto m = train(d);
    CHECK_THROWS_WITH_AS(predict(m, std::vector<double>{1.0}), "feature arity mismatch: model expects 2, got 1", Error);
    Dataset empty;
    empty.feature_names = d.feature_names;
    CHECK_THROWS_WITH_AS(evaluate(m, empty), "empty test set", Error);
}

TEST_CASE("one machine per class, one in binary mode") {
    const auto bin = train(clusters({"N", "V"}, 30, 2));
    CHECK(bin.binary());
    CHECK(bin.machines.size() == 1);
    const auto multi = train(clusters({"N", "S", "M", "L"}, 30, 2));
    CHECK(multi.machines.size() == 4);
    CHECK(multi.classes == std::vector<std::string>{"N", "S", "M", "L"});
}

TEST_CASE("perfect classifier gives a diagonal confusion matrix") {
    const auto d = clusters({"N", "S", "M", "L"}, 30, 5);
    const auto m = train(d);
    const auto cm = evaluate(m, clusters({"N", "S", "M", "L"}, 10, 6));
    for (std::size_t i = 0; i < cm.labels.size(); ++i) {
        CHECK(cm.row_total(i) == 10);
        for (std::size_t j = 0; j < cm.labels.size(); ++j) CHECK(cm.counts[i][j] == (i == j ? 10u : 0u));
    }
    CHECK(cm.mean_accuracy() == 1.0);
    CHECK(cm.overall_accuracy() == 1.0);
}

TEST_CASE("confusion matrix bookkeeping") {
    const std::vector<std::string> t{"N", "N", "N", "S", "S", "L"};
    const std::vector<std::string> p{"N", "S", "N", "S", "N", "L"};
    const auto cm = tally(t, p);
    CHECK(cm.labels == std::vector<std::string>{"N", "S", "L"});
    CHECK(cm.row_total(0) == 3);
    CHECK(cm.class_accuracy(0) == doctest::Approx(2.0 / 3));
    CHECK(cm.mean_accuracy() == doctest::Approx((2.0 / 3 + 0.5 + 1.0) / 3));
    CHECK(cm.overall_accuracy() == doctest::Approx(4.0 / 6));
    std::ostringstream csv;
    cm.write_csv(csv);
    CHECK(csv.str().rfind("truth,N,S,L,accuracy\n", 0) == 0);
}

TEST_CASE("four-class scoring maps mixes only on overlapped truth") {
    const std::vector<std::string> seven{"N", "S", "M", "L", "S-mix", "M-mix", "L-mix"};
    const auto model = train(clusters(seven, 20, 8));
    auto at = [](double f) { return std::vector<double>{f, 0.0}; };
    Dataset test;
    test.feature_names = {"f", "g"};
    test.push(at(10), "S-mix"); // predicted S: counts as correct after mapping
    test.push(at(40), "S");     // predicted S-mix on single-vehicle truth: an error
    test.push(at(60), "L-mix"); // predicted L-mix, maps to L
    const auto exact = evaluate(model, test, Scoring::Exact);
    CHECK(exact.overall_accuracy() == doctest::Approx(1.0 / 3));
    const auto four = evaluate(model, test, Scoring::FourClass);
    CHECK(four.overall_accuracy() == doctest::Approx(2.0 / 3));
    CHECK(four.accuracy_of("S") == doctest::Approx(0.5));
    CHECK(four.accuracy_of("L") == 1.0);
}

TEST_CASE("stratified split") {
    std::vector<std::string> labels;
    for (int i = 0; i < 100; ++i) labels.push_back(i < 60 ? "N" : (i < 85 ? "S" : "L"));
    const auto [tr, te] = split_indices(labels, 0.8, 5);
    CHECK(tr.size() == 80);
    CHECK(te.size() == 20);
    auto count = [&](const std::vector<std::size_t>& idx, const char* l) {
        return std::count_if(idx.begin(), idx.end(), [&](std::size_t i) { return labels[i] == l; });
    };
    CHECK(std::abs(count(te, "N") - 12) <= 1);
    CHECK(std::abs(count(te, "S") - 5) <= 1);
    CHECK(std::abs(count(te, "L") - 3) <= 1);
    std::vector<bool> seen(100, false);
    for (auto i : tr) seen[i] = true;
    for (auto i : te) {
        CHECK_FALSE(seen[i]);
        seen[i] = true;
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
    CHECK(split_indices(labels, 0.8, 5) == split_indices(labels, 0.8, 5));
    CHECK(split_indices(labels, 0.8, 5) != split_indices(labels, 0.8, 6));
    labels.push_back("M");
    CHECK_THROWS_WITH_AS(split_indices(labels, 0.8, 5), "class M has 1 sample(s); a split needs 2", Error);
}

TEST_CASE("training is deterministic and models survive save/load") {
    Rng rng(9);
    const auto d = xor_data(rng);
    const auto a = train(d), b = train(d);
    REQUIRE(a.machines.size() == b.machines.size());
    CHECK(a.machines[0].coef == b.machines[0].coef);
    CHECK(a.machines[0].bias == b.machines[0].bias);

    std::stringstream ss;
    save_model(ss, a);
    const auto back = load_model(ss);
    CHECK(back.classes == a.classes);
    CHECK(back.features == a.features);
    for (const auto& row : d.x) {
        const auto p = predict(a, row), q = predict(back, row);
        CHECK(p.label == q.label);
        CHECK(p.decision == q.decision);
    }
    std::istringstream junk(R"({"format":"other","version":1})");
    CHECK_THROWS_AS(load_model(junk), Error);
    std::istringstream future(R"({"format":"liver-svm","version":99})");
    CHECK_THROWS_AS(load_model(future), Error);
}
