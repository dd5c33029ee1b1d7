#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "liver/common.hpp"
#include "liver/metrics.hpp"

namespace liver {

using Matrix = std::vector<std::vector<double>>;

/// Feature rows with string class names.
struct Dataset {
    std::vector<std::string> feature_names;
    Matrix x;
    std::vector<std::string> y;

    std::size_t size() const { return y.size(); }
    void push(std::vector<double> row, std::string label);
};

/// How window labels are turned into class names.
enum class LabelView : std::uint8_t {
    SevenClass, ///< N, S, M, L, S-mix, M-mix, L-mix
    FourClass,  ///< N, S, M, L; overlapped windows are dropped
    Detection,  ///< N vs V (any vehicle)
};
LabelView parse_label_view(const std::string& s);
std::string to_string(LabelView v);

Dataset make_dataset(std::span<const FeatureVector> rows, std::span<const std::string> features, LabelView view);

enum class KernelKind : std::uint8_t { Linear, Rbf };
std::string to_string(KernelKind k);
KernelKind parse_kernel(const std::string& s);

struct Kernel {
    KernelKind kind = KernelKind::Rbf;
    double gamma = 1.0;

    double operator()(std::span<const double> a, std::span<const double> b) const;
};

struct SvmConfig {
    KernelKind kernel = KernelKind::Rbf;
    /// <= 0 selects 1 / (number of features kept after scaling).
    double gamma = 0.0;
    double c = 1.0;
    double tolerance = 1e-4;
    /// <= 0 selects max(10^7, 100 n).
    std::int64_t max_iterations = 0;
    /// Scale C per sample by inverse class frequency.
    bool class_weighting = true;
    std::size_t cache_bytes = std::size_t{256} << 20;
    std::uint64_t seed = 1;

    void validate() const;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double gap) : Error(what), duality_gap(gap) {}
    double duality_gap;
};

/// Solution of one soft-margin dual problem
///   min 1/2 a'Qa - sum a,  0 <= a_i <= C_i,  y'a = 0.
struct BinarySolution {
    std::vector<double> alpha;
    double bias = 0;
    /// Explicit weights, linear kernel only.
    std::vector<double> w;
    std::int64_t iterations = 0;
    double primal = 0;
    double dual = 0;

    double gap() const { return primal - dual; }
};

/// SMO with second-order working-set selection. y entries must be +1 / -1.
BinarySolution solve_binary(const Matrix& x, std::span<const int> y, std::span<const double> c, const Kernel& kernel,
                            double tolerance, std::int64_t max_iterations, std::size_t cache_bytes = std::size_t{64} << 20);

/// 1/2 |w|^2 + sum_i c_i max(0, 1 - y_i (w.x_i + b)).
double primal_objective(const Matrix& x, std::span<const int> y, std::span<const double> c, std::span<const double> w,
                        double b);

struct Scaler {
    std::vector<std::string> kept;
    std::vector<std::string> dropped;
    std::vector<std::size_t> columns; ///< input column of each kept feature
    std::vector<double> mean;
    std::vector<double> sd;

    static Scaler fit(const Dataset& data);
    std::vector<double> transform(std::span<const double> row) const;
};

struct BinaryMachine {
    std::string positive;
    Matrix support;
    std::vector<double> coef; ///< alpha_i y_i
    std::vector<double> w;    ///< linear kernel only
    double bias = 0;

    double decision(std::span<const double> scaled, const Kernel& kernel) const;
};

struct SvmModel {
    std::vector<std::string> features; ///< input arity and order
    Scaler scaler;
    Kernel kernel;
    std::vector<std::string> classes;
    /// One machine in binary mode (positive class = classes[1]), otherwise one per class.
    std::vector<BinaryMachine> machines;

    bool binary() const { return classes.size() == 2; }
};

SvmModel train(const Dataset& data, const SvmConfig& config = {});

struct Prediction {
    std::string label;
    std::vector<double> decision; ///< one value per class, in model class order
};

Prediction predict(const SvmModel& model, std::span<const double> row);

enum class Scoring : std::uint8_t {
    Exact,
    /// Overlapped truth collapses to its base class, as do mix predictions on
    /// overlapped truth; a mix prediction on single-vehicle truth stays an error.
    FourClass,
};
std::string to_string(Scoring s);
Scoring parse_scoring(const std::string& s);

struct ConfusionMatrix {
    std::vector<std::string> labels;            ///< row and column order
    std::vector<std::vector<std::size_t>> counts; ///< [truth][predicted]

    std::size_t row_total(std::size_t i) const;
    std::size_t total() const;
    /// Recall of row i; NaN for empty rows.
    double class_accuracy(std::size_t i) const;
    /// Unweighted mean of class accuracies over non-empty rows.
    double mean_accuracy() const;
    double overall_accuracy() const;
    double accuracy_of(const std::string& label) const;

    std::string to_text() const;
    void write_csv(std::ostream& out) const;
};

ConfusionMatrix evaluate(const SvmModel& model, const Dataset& test, Scoring scoring = Scoring::Exact);
/// Tallies already-made predictions.
ConfusionMatrix tally(std::span<const std::string> truth, std::span<const std::string> predicted,
                      std::span<const std::string> extra_labels = {});

/// Stratified partition; returns (train indices, test indices), each ascending.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::span<const std::string> labels,
                                                                            double fraction, std::uint64_t seed);
std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed);

void save_model(std::ostream& out, const SvmModel& model);
SvmModel load_model(std::istream& in);

} // namespace liver
