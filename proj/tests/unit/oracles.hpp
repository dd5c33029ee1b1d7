#pragma once

// Independent reference implementations used only by tests. None of these
// share code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

namespace oracle {

/// Plain BFS over an adjacency predicate; -1 for unreachable nodes.
inline std::vector<int> bfs(std::size_t n, std::size_t source, const std::function<bool(std::size_t, std::size_t)>& edge) {
    std::vector<int> dist(n, -1);
    std::queue<std::size_t> q;
    dist[source] = 0;
    q.push(source);
    while (!q.empty()) {
        const auto u = q.front();
        q.pop();
        for (std::size_t v = 0; v < n; ++v)
            if (dist[v] < 0 && edge(u, v)) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
    }
    return dist;
}

inline double two_pass_sd(const std::vector<double>& x) {
    if (x.empty()) return 0;
    double mean = 0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(x.size()));
}

struct Span {
    std::int64_t begin;
    std::int64_t end;
    int size; // 0 S, 1 M, 2 L
};

/// Seven-class label by scanning every vehicle: 0 N, 1 S, 2 M, 3 L, 4 S-mix, 5 M-mix, 6 L-mix.
inline int brute_label(const std::vector<Span>& vehicles, std::int64_t t0, std::int64_t t1) {
    int count = 0, largest = -1;
    for (const auto& v : vehicles)
        if (std::max(v.begin, t0) < std::min(v.end, t1)) {
            ++count;
            largest = std::max(largest, v.size);
        }
    if (count == 0) return 0;
    if (count == 1) return 1 + largest;
    return 4 + largest;
}

/// Unit-rate interval sweep: total length covered by at least `k` of the intervals.
inline std::int64_t covered_at_least(std::vector<Span> spans, int k) {
    std::vector<std::pair<std::int64_t, int>> ev;
    for (const auto& s : spans) {
        ev.emplace_back(s.begin, +1);
        ev.emplace_back(s.end, -1);
    }
    std::sort(ev.begin(), ev.end());
    std::int64_t total = 0;
    int depth = 0;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (i > 0 && depth >= k) total += ev[i].first - ev[i - 1].first;
        depth += ev[i].second;
    }
    return total;
}

/// Soft-margin linear SVM primal, minimised by brute force: for fixed w the
/// best bias is found exactly among the hinge breakpoints; w is searched on a
/// dense grid that is repeatedly re-centred and shrunk.
class PrimalSvm {
public:
    PrimalSvm(std::vector<std::vector<double>> x, std::vector<int> y, std::vector<double> c)
        : x_(std::move(x)), y_(std::move(y)), c_(std::move(c)) {}

    double objective(const std::vector<double>& w, double b) const {
        double f = 0;
        for (double v : w) f += 0.5 * v * v;
        for (std::size_t i = 0; i < x_.size(); ++i) f += c_[i] * std::max(0.0, 1 - y_[i] * (dot(w, x_[i]) + b));
        return f;
    }

    /// min over b of the objective, exact. The hinge sum is convex and
    /// piecewise linear in b; its slope grows by c_j at each breakpoint.
    double best_over_b(const std::vector<double>& w, double* b_out = nullptr) const {
        const std::size_t n = x_.size();
        std::vector<std::pair<double, double>> bp(n);
        double slope = 0;
        for (std::size_t j = 0; j < n; ++j) {
            bp[j] = {y_[j] - dot(w, x_[j]), c_[j]};
            if (y_[j] > 0) slope -= c_[j];
        }
        std::sort(bp.begin(), bp.end());
        double b = bp.back().first;
        for (const auto& [at, c] : bp) {
            slope += c;
            if (slope >= 0) {
                b = at;
                break;
            }
        }
        if (b_out) *b_out = b;
        return objective(w, b);
    }

    /// 2-D weights only.
    double solve(int grid = 61, int levels = 30) const {
        double radius = 0;
        {
            // |w|^2 / 2 <= f(0, b*) bounds the optimum.
            const double f0 = best_over_b({0.0, 0.0});
            radius = std::sqrt(2 * f0) + 1e-9;
        }
        double cx = 0, cy = 0;
        double best = best_over_b({0.0, 0.0});
        for (int level = 0; level < levels; ++level) {
            const double step = 2 * radius / (grid - 1);
            double bx = cx, by = cy;
            for (int i = 0; i < grid; ++i)
                for (int j = 0; j < grid; ++j) {
                    const double wx = cx - radius + i * step;
                    const double wy = cy - radius + j * step;
                    const double f = best_over_b({wx, wy});
                    if (f < best) {
                        best = f;
                        bx = wx;
                        by = wy;
                    }
                }
            cx = bx;
            cy = by;
            radius = 3 * step;
        }
        return best;
    }

private:
    static double dot(const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    }

    std::vector<std::vector<double>> x_;
    std::vector<int> y_;
    std::vector<double> c_;
};

} // namespace oracle
