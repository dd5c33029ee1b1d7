#include "liver/svm.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <list>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "liver/csv.hpp"

namespace liver {

void Dataset::push(std::vector<double> row, std::string label) {
    if (!feature_names.empty() && row.size() != feature_names.size())
        throw Error("row arity " + std::to_string(row.size()) + " does not match " +
                    std::to_string(feature_names.size()) + " features");
    x.push_back(std::move(row));
    y.push_back(std::move(label));
}

LabelView parse_label_view(const std::string& s) {
    if (s == "seven" || s == "7") return LabelView::SevenClass;
    if (s == "four" || s == "4") return LabelView::FourClass;
    if (s == "detection" || s == "binary") return LabelView::Detection;
    throw Error("unknown label view '" + s + "' (expected seven, four or detection)");
}

std::string to_string(LabelView v) {
    switch (v) {
    case LabelView::SevenClass: return "seven";
    case LabelView::FourClass: return "four";
    case LabelView::Detection: return "detection";
    }
    return "?";
}

Dataset make_dataset(std::span<const FeatureVector> rows, std::span<const std::string> features, LabelView view) {
    Dataset d;
    d.feature_names.assign(features.begin(), features.end());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& fv = rows[i];
        if (!fv.label) throw Error("row " + std::to_string(i) + " has no label");
        std::string name;
        switch (view) {
        case LabelView::SevenClass: name = to_string(*fv.label); break;
        case LabelView::FourClass:
            if (is_mix(*fv.label)) continue;
            name = to_string(*fv.label);
            break;
        case LabelView::Detection: name = *fv.label == Label::N ? "N" : "V"; break;
        }
        d.push(feature_values(fv, features), std::move(name));
    }
    return d;
}

std::string to_string(KernelKind k) { return k == KernelKind::Linear ? "linear" : "rbf"; }

KernelKind parse_kernel(const std::string& s) {
    if (s == "linear") return KernelKind::Linear;
    if (s == "rbf") return KernelKind::Rbf;
    throw Error("unknown kernel '" + s + "' (expected linear or rbf)");
}

double Kernel::operator()(std::span<const double> a, std::span<const double> b) const {
    double acc = 0;
    if (kind == KernelKind::Linear) {
        for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
        return acc;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::exp(-gamma * acc);
}

void SvmConfig::validate() const {
    if (!(c > 0)) throw Error("svm: C must be > 0");
    if (!(tolerance > 0)) throw Error("svm: tolerance must be > 0");
    if (kernel == KernelKind::Rbf && gamma < 0) throw Error("svm: gamma must be >= 0");
}

namespace {

/// LRU cache of rows of Q_ij = y_i y_j K(x_i, x_j).
class QCache {
public:
    QCache(const Matrix& x, std::span<const int> y, const Kernel& kernel, std::size_t bytes)
        : x_(x), y_(y), kernel_(kernel), rows_(x.size()), where_(x.size()) {
        const std::size_t per_row = std::max<std::size_t>(1, x.size() * sizeof(double));
        capacity_ = std::max<std::size_t>(2, bytes / per_row);
    }

    const std::vector<double>& row(std::size_t i) {
        if (rows_[i]) {
            order_.splice(order_.begin(), order_, where_[i]);
            return *rows_[i];
        }
        if (order_.size() >= capacity_) {
            const std::size_t victim = order_.back();
            order_.pop_back();
            rows_[victim].reset();
        }
        std::vector<double> r(x_.size());
        for (std::size_t j = 0; j < x_.size(); ++j) r[j] = y_[i] * y_[j] * kernel_(x_[i], x_[j]);
        rows_[i] = std::move(r);
        order_.push_front(i);
        where_[i] = order_.begin();
        return *rows_[i];
    }

private:
    const Matrix& x_;
    std::span<const int> y_;
    const Kernel& kernel_;
    std::vector<std::optional<std::vector<double>>> rows_;
    std::vector<std::list<std::size_t>::iterator> where_;
    std::list<std::size_t> order_;
    std::size_t capacity_ = 2;
};

constexpr double kTau = 1e-12;

struct Objectives {
    double primal;
    double dual;
};

Objectives objectives(std::span<const double> alpha, std::span<const double> grad, std::span<const int> y,
                      std::span<const double> c, double bias) {
    double aqa = 0;
    double sum_a = 0;
    double hinge = 0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        aqa += alpha[i] * (grad[i] + 1.0);
        sum_a += alpha[i];
        const double f = y[i] * (grad[i] + 1.0) + bias;
        hinge += c[i] * std::max(0.0, 1.0 - y[i] * f);
    }
    return {0.5 * aqa + hinge, sum_a - 0.5 * aqa};
}

} // namespace

BinarySolution solve_binary(const Matrix& x, std::span<const int> y, std::span<const double> c, const Kernel& kernel,
                            double tolerance, std::int64_t max_iterations, std::size_t cache_bytes) {
    const std::size_t n = x.size();
    if (n == 0 || y.size() != n || c.size() != n) throw Error("solve_binary: inconsistent problem size");
    bool has_pos = false;
    bool has_neg = false;
    for (int v : y) {
        if (v == 1) has_pos = true;
        else if (v == -1) has_neg = true;
        else throw Error("solve_binary: labels must be +1 or -1");
    }
    if (!has_pos || !has_neg) throw Error("solve_binary: both signs required");
    if (max_iterations <= 0) max_iterations = std::max<std::int64_t>(10'000'000, 100 * static_cast<std::int64_t>(n));

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);
    std::vector<double> qd(n);
    for (std::size_t i = 0; i < n; ++i) qd[i] = kernel(x[i], x[i]);
    QCache cache(x, y, kernel, cache_bytes);

    auto at_upper = [&](std::size_t i) { return alpha[i] >= c[i]; };
    auto at_lower = [&](std::size_t i) { return alpha[i] <= 0; };

    std::int64_t iter = 0;
    bool converged = false;
    for (; iter < max_iterations; ++iter) {
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] == 1 ? !at_upper(t) : !at_lower(t)) {
                if (-y[t] * grad[t] >= gmax) {
                    gmax = -y[t] * grad[t];
                    i = t;
                }
            }
        }
        if (i == n) {
            converged = true;
            break;
        }
        const auto& qi = cache.row(i);
        double gmax2 = -std::numeric_limits<double>::infinity();
        double best = std::numeric_limits<double>::infinity();
        std::size_t j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const bool in_low = y[t] == 1 ? !at_lower(t) : !at_upper(t);
            if (!in_low) continue;
            const double yg = y[t] * grad[t];
            gmax2 = std::max(gmax2, yg);
            const double diff = gmax + yg;
            if (diff > 0) {
                double quad = qd[i] + qd[t] - 2.0 * y[i] * y[t] * qi[t];
                if (quad <= 0) quad = kTau;
                const double obj = -(diff * diff) / quad;
                if (obj <= best) {
                    best = obj;
                    j = t;
                }
            }
        }
        if (gmax + gmax2 < tolerance || j == n) {
            converged = true;
            break;
        }
        // i is the most recent entry, so fetching j cannot evict it.
        const auto& qj = cache.row(j);
        const double old_i = alpha[i];
        const double old_j = alpha[j];
        const double ci = c[i];
        const double cj = c[j];
        if (y[i] != y[j]) {
            double quad = qd[i] + qd[j] + 2.0 * qi[j];
            if (quad <= 0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = -diff;
            }
            if (diff > ci - cj) {
                if (alpha[i] > ci) {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if (alpha[j] > cj) {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            double quad = qd[i] + qd[j] - 2.0 * qi[j];
            if (quad <= 0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > ci) {
                if (alpha[i] > ci) {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if (alpha[j] < 0) {
                alpha[j] = 0;
                alpha[i] = sum;
            }
            if (sum > cj) {
                if (alpha[j] > cj) {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = sum;
            }
        }
        const double di = alpha[i] - old_i;
        const double dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < n; ++t) grad[t] += qi[t] * di + qj[t] * dj;
    }

    // Offset from the free variables, or the midpoint of the feasible range.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (at_upper(t)) {
            if (y[t] == -1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (at_lower(t)) {
            if (y[t] == 1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

    BinarySolution sol;
    sol.bias = -rho;
    sol.iterations = iter;
    const auto obj = objectives(alpha, grad, y, c, sol.bias);
    sol.primal = obj.primal;
    sol.dual = obj.dual;
    if (!converged)
        throw ConvergenceError("svm did not converge within " + std::to_string(max_iterations) +
                                   " iterations (duality gap " + csv::format(sol.gap()) + ")",
                               sol.gap());
    if (kernel.kind == KernelKind::Linear) {
        sol.w.assign(x.front().size(), 0.0);
        for (std::size_t t = 0; t < n; ++t)
            if (alpha[t] > 0)
                for (std::size_t k = 0; k < sol.w.size(); ++k) sol.w[k] += alpha[t] * y[t] * x[t][k];
    }
    sol.alpha = std::move(alpha);
    return sol;
}

double primal_objective(const Matrix& x, std::span<const int> y, std::span<const double> c, std::span<const double> w,
                        double b) {
    double obj = 0;
    for (double v : w) obj += 0.5 * v * v;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double f = b;
        for (std::size_t k = 0; k < w.size(); ++k) f += w[k] * x[i][k];
        obj += c[i] * std::max(0.0, 1.0 - y[i] * f);
    }
    return obj;
}

Scaler Scaler::fit(const Dataset& data) {
    if (data.size() == 0) throw Error("cannot fit a scaler on an empty data set");
    Scaler s;
    const std::size_t d = data.feature_names.size();
    for (std::size_t k = 0; k < d; ++k) {
        RunningStats st;
        for (const auto& row : data.x) st.add(row[k]);
        const double sd = st.stddev();
        if (!(sd > 1e-12 * std::max(1.0, std::abs(st.mean())))) {
            s.dropped.push_back(data.feature_names[k]);
            continue;
        }
        s.kept.push_back(data.feature_names[k]);
        s.columns.push_back(k);
        s.mean.push_back(st.mean());
        s.sd.push_back(sd);
    }
    if (s.kept.empty()) throw Error("every feature is constant; nothing to train on");
    return s;
}

std::vector<double> Scaler::transform(std::span<const double> row) const {
    std::vector<double> out(columns.size());
    for (std::size_t k = 0; k < columns.size(); ++k) out[k] = (row[columns[k]] - mean[k]) / sd[k];
    return out;
}

double BinaryMachine::decision(std::span<const double> scaled, const Kernel& kernel) const {
    double f = bias;
    if (!w.empty()) {
        for (std::size_t k = 0; k < w.size(); ++k) f += w[k] * scaled[k];
        return f;
    }
    for (std::size_t t = 0; t < support.size(); ++t) f += coef[t] * kernel(support[t], scaled);
    return f;
}

namespace {

int class_rank(const std::string& s) {
    static const std::vector<std::string> order{"N", "S", "M", "L", "S-mix", "M-mix", "L-mix", "V"};
    const auto it = std::find(order.begin(), order.end(), s);
    return it == order.end() ? static_cast<int>(order.size()) : static_cast<int>(it - order.begin());
}

void canonical_sort(std::vector<std::string>& labels) {
    std::sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
        const int ra = class_rank(a);
        const int rb = class_rank(b);
        return ra != rb ? ra < rb : a < b;
    });
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
}

bool is_mix_name(const std::string& s) { return s.size() > 4 && s.ends_with("-mix"); }
std::string base_name(const std::string& s) { return is_mix_name(s) ? s.substr(0, s.size() - 4) : s; }

BinaryMachine train_machine(const Matrix& x, const std::vector<std::string>& labels, const std::string& positive,
                            const Kernel& kernel, const SvmConfig& cfg) {
    const std::size_t n = x.size();
    std::vector<int> y(n);
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = labels[i] == positive ? 1 : -1;
        if (y[i] == 1) ++n_pos;
    }
    std::vector<double> c(n, cfg.c);
    if (cfg.class_weighting) {
        const double wp = static_cast<double>(n) / (2.0 * static_cast<double>(n_pos));
        const double wn = static_cast<double>(n) / (2.0 * static_cast<double>(n - n_pos));
        for (std::size_t i = 0; i < n; ++i) c[i] = cfg.c * (y[i] == 1 ? wp : wn);
    }
    auto sol = solve_binary(x, y, c, kernel, cfg.tolerance, cfg.max_iterations, cfg.cache_bytes);
    BinaryMachine m;
    m.positive = positive;
    m.bias = sol.bias;
    m.w = std::move(sol.w);
    if (m.w.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
            if (sol.alpha[i] > 0) {
                m.support.push_back(x[i]);
                m.coef.push_back(sol.alpha[i] * y[i]);
            }
        }
    }
    return m;
}

} // namespace

SvmModel train(const Dataset& data, const SvmConfig& config) {
    config.validate();
    std::map<std::string, std::size_t> counts;
    for (const auto& l : data.y) ++counts[l];
    if (counts.size() < 2) throw Error("training needs at least two classes (got " + std::to_string(counts.size()) + ")");
    for (const auto& [label, n] : counts)
        if (n < 10) throw Error("class " + label + " has " + std::to_string(n) + " samples; at least 10 required");

    SvmModel model;
    model.features = data.feature_names;
    model.scaler = Scaler::fit(data);
    model.kernel.kind = config.kernel;
    model.kernel.gamma = config.gamma > 0 ? config.gamma : 1.0 / static_cast<double>(model.scaler.kept.size());
    for (const auto& [label, n] : counts) model.classes.push_back(label);
    canonical_sort(model.classes);

    Matrix scaled;
    scaled.reserve(data.size());
    for (const auto& row : data.x) scaled.push_back(model.scaler.transform(row));

    if (model.binary()) {
        model.machines.push_back(train_machine(scaled, data.y, model.classes[1], model.kernel, config));
    } else {
        for (const auto& cls : model.classes)
            model.machines.push_back(train_machine(scaled, data.y, cls, model.kernel, config));
    }
    return model;
}

Prediction predict(const SvmModel& model, std::span<const double> row) {
    if (row.size() != model.features.size())
        throw Error("feature arity mismatch: model expects " + std::to_string(model.features.size()) + ", got " +
                    std::to_string(row.size()));
    const auto scaled = model.scaler.transform(row);
    Prediction p;
    if (model.binary()) {
        const double f = model.machines.front().decision(scaled, model.kernel);
        p.decision = {-f, f};
    } else {
        for (const auto& m : model.machines) p.decision.push_back(m.decision(scaled, model.kernel));
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < p.decision.size(); ++k)
        if (p.decision[k] > p.decision[best]) best = k;
    p.label = model.classes[best];
    return p;
}

std::size_t ConfusionMatrix::row_total(std::size_t i) const {
    return std::accumulate(counts[i].begin(), counts[i].end(), std::size_t{0});
}

std::size_t ConfusionMatrix::total() const {
    std::size_t t = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) t += row_total(i);
    return t;
}

double ConfusionMatrix::class_accuracy(std::size_t i) const {
    const std::size_t n = row_total(i);
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(counts[i][i]) / static_cast<double>(n);
}

double ConfusionMatrix::mean_accuracy() const {
    double sum = 0;
    std::size_t rows = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (row_total(i) == 0) continue;
        sum += class_accuracy(i);
        ++rows;
    }
    return rows ? sum / static_cast<double>(rows) : std::numeric_limits<double>::quiet_NaN();
}

double ConfusionMatrix::overall_accuracy() const {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) hit += counts[i][i];
    const std::size_t n = total();
    return n ? static_cast<double>(hit) / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

double ConfusionMatrix::accuracy_of(const std::string& label) const {
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) return std::numeric_limits<double>::quiet_NaN();
    return class_accuracy(static_cast<std::size_t>(it - labels.begin()));
}

std::string ConfusionMatrix::to_text() const {
    std::ostringstream out;
    out << std::left << std::setw(8) << "truth";
    for (const auto& l : labels) out << std::right << std::setw(8) << l;
    out << std::right << std::setw(10) << "acc" << '\n';
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (row_total(i) == 0) continue;
        out << std::left << std::setw(8) << labels[i];
        for (std::size_t j = 0; j < labels.size(); ++j) out << std::right << std::setw(8) << counts[i][j];
        out << std::right << std::setw(9) << std::fixed << std::setprecision(1) << 100.0 * class_accuracy(i) << "%\n";
    }
    out << "mean accuracy " << std::fixed << std::setprecision(2) << 100.0 * mean_accuracy() << "%, overall "
        << 100.0 * overall_accuracy() << "% over " << total() << " samples\n";
    return out.str();
}

void ConfusionMatrix::write_csv(std::ostream& out) const {
    out << "truth";
    for (const auto& l : labels) out << ',' << l;
    out << ",accuracy\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (row_total(i) == 0) continue;
        out << labels[i];
        for (std::size_t j = 0; j < labels.size(); ++j) out << ',' << counts[i][j];
        out << ',' << csv::format(class_accuracy(i)) << '\n';
    }
    out << "mean,";
    for (std::size_t j = 0; j < labels.size(); ++j) out << ',';
    out << csv::format(mean_accuracy()) << '\n';
}

ConfusionMatrix tally(std::span<const std::string> truth, std::span<const std::string> predicted,
                      std::span<const std::string> extra_labels) {
    if (truth.size() != predicted.size()) throw Error("truth and prediction counts differ");
    if (truth.empty()) throw Error("empty test set");
    ConfusionMatrix cm;
    cm.labels.assign(truth.begin(), truth.end());
    cm.labels.insert(cm.labels.end(), predicted.begin(), predicted.end());
    cm.labels.insert(cm.labels.end(), extra_labels.begin(), extra_labels.end());
    canonical_sort(cm.labels);
    cm.counts.assign(cm.labels.size(), std::vector<std::size_t>(cm.labels.size(), 0));
    auto index = [&](const std::string& l) {
        return static_cast<std::size_t>(std::find(cm.labels.begin(), cm.labels.end(), l) - cm.labels.begin());
    };
    for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts[index(truth[i])][index(predicted[i])];
    return cm;
}

std::string to_string(Scoring s) { return s == Scoring::Exact ? "exact" : "four-class"; }

Scoring parse_scoring(const std::string& s) {
    if (s == "exact") return Scoring::Exact;
    if (s == "four-class") return Scoring::FourClass;
    throw Error("unknown scoring '" + s + "' (expected exact or four-class)");
}

ConfusionMatrix evaluate(const SvmModel& model, const Dataset& test, Scoring scoring) {
    if (test.size() == 0) throw Error("empty test set");
    if (test.feature_names != model.features)
        throw Error("test features do not match the model's feature list");
    std::vector<std::string> truth;
    std::vector<std::string> pred;
    truth.reserve(test.size());
    pred.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        std::string t = test.y[i];
        std::string p = predict(model, test.x[i]).label;
        if (scoring == Scoring::FourClass) {
            if (is_mix_name(t)) {
                t = base_name(t);
                p = base_name(p);
            }
        }
        truth.push_back(std::move(t));
        pred.push_back(std::move(p));
    }
    std::vector<std::string> extra;
    if (scoring == Scoring::Exact) extra = model.classes;
    else
        for (const auto& c : model.classes)
            if (!is_mix_name(c)) extra.push_back(c);
    return tally(truth, pred, extra);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::span<const std::string> labels,
                                                                            double fraction, std::uint64_t seed) {
    if (!(fraction > 0 && fraction < 1)) throw Error("split fraction must lie in (0, 1)");
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
    Rng rng(seed);
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (auto& [label, idx] : groups) {
        if (idx.size() < 2)
            throw Error("class " + label + " has " + std::to_string(idx.size()) + " sample(s); a split needs 2");
        std::shuffle(idx.begin(), idx.end(), rng);
        auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
        k = std::clamp<std::size_t>(k, 1, idx.size() - 1);
        train.insert(train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
        test.insert(test.end(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed) {
    const auto [tr, te] = split_indices(data.y, fraction, seed);
    Dataset a;
    Dataset b;
    a.feature_names = b.feature_names = data.feature_names;
    for (auto i : tr) a.push(data.x[i], data.y[i]);
    for (auto i : te) b.push(data.x[i], data.y[i]);
    return {a, b};
}

namespace {
constexpr const char* kModelFormat = "liver-svm";
constexpr int kModelVersion = 1;
} // namespace

void save_model(std::ostream& out, const SvmModel& model) {
    nlohmann::json j;
    j["format"] = kModelFormat;
    j["version"] = kModelVersion;
    j["features"] = model.features;
    j["scaler"] = {{"kept", model.scaler.kept},
                   {"dropped", model.scaler.dropped},
                   {"columns", model.scaler.columns},
                   {"mean", model.scaler.mean},
                   {"sd", model.scaler.sd}};
    j["kernel"] = {{"kind", to_string(model.kernel.kind)}, {"gamma", model.kernel.gamma}};
    j["classes"] = model.classes;
    auto& ms = j["machines"] = nlohmann::json::array();
    for (const auto& m : model.machines)
        ms.push_back({{"positive", m.positive}, {"bias", m.bias}, {"w", m.w}, {"coef", m.coef}, {"support", m.support}});
    out << j.dump(1) << '\n';
}

SvmModel load_model(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
        if (j.at("format") != kModelFormat) throw Error("not an svm model file");
        if (j.at("version") != kModelVersion)
            throw Error("unsupported model version " + j.at("version").dump());
        SvmModel m;
        j.at("features").get_to(m.features);
        const auto& s = j.at("scaler");
        s.at("kept").get_to(m.scaler.kept);
        s.at("dropped").get_to(m.scaler.dropped);
        s.at("columns").get_to(m.scaler.columns);
        s.at("mean").get_to(m.scaler.mean);
        s.at("sd").get_to(m.scaler.sd);
        m.kernel.kind = parse_kernel(j.at("kernel").at("kind").get<std::string>());
        m.kernel.gamma = j.at("kernel").at("gamma").get<double>();
        j.at("classes").get_to(m.classes);
        for (const auto& mj : j.at("machines")) {
            BinaryMachine b;
            mj.at("positive").get_to(b.positive);
            mj.at("bias").get_to(b.bias);
            mj.at("w").get_to(b.w);
            mj.at("coef").get_to(b.coef);
            mj.at("support").get_to(b.support);
            m.machines.push_back(std::move(b));
        }
        const std::size_t expected = m.classes.size() == 2 ? 1 : m.classes.size();
        if (m.machines.size() != expected) throw Error("model has the wrong number of machines");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed model file: ") + e.what());
    }
}

} // namespace liver
