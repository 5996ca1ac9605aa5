#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace greyvalve {

// Samples are stored one per row so that each input vector is contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Per-feature z-score statistics. A feature with zero spread keeps std = 1.
struct Normalization {
    std::vector<double> mean;
    std::vector<double> std;

    static Normalization fit(const RowMatrix& X);

    std::size_t dim() const { return mean.size(); }
    RowMatrix apply(const RowMatrix& X) const;
    void apply_inplace(std::span<double> x) const;
};

struct Dataset {
    RowMatrix X;       // l x n
    Eigen::VectorXd Y; // l
    std::optional<Normalization> norm;
    std::vector<std::string> feature_names;

    std::size_t size() const { return static_cast<std::size_t>(X.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(X.cols()); }

    // Throws InputError on empty data, shape mismatch or non-finite entries.
    void validate() const;

    // X, transformed by norm when present.
    RowMatrix inputs() const;

    // Copy with z-score statistics fitted on X.
    Dataset normalized() const;
};

struct RbfKernel {
    double sigma = 1.0;
};
struct LinearKernel {};
struct PolynomialKernel {
    int degree = 2;
    double offset = 1.0;
};

using KernelSpec = std::variant<RbfKernel, LinearKernel, PolynomialKernel>;

void validate_kernel(const KernelSpec& k);
std::string kernel_name(const KernelSpec& k);

double kernel_eval(const KernelSpec& k, std::span<const double> x, std::span<const double> x2);

// Gram matrix over data.inputs(); symmetric by construction.
Eigen::MatrixXd gram_matrix(const Dataset& data, const KernelSpec& k);
Eigen::MatrixXd gram_matrix(const RowMatrix& Z, const KernelSpec& k);

// Median Euclidean distance between distinct rows (pairs i < j). Large
// inputs are thinned to an evenly strided subset of at most max_rows rows.
// Returns 1 when every distance is zero or there is a single row.
double median_pairwise_distance(const RowMatrix& Z, std::size_t max_rows = 2000);

// Rbf bandwidth from the median heuristic over data.inputs().
RbfKernel median_heuristic_rbf(const Dataset& data);

// Fitted model. Immutable; safe to share between threads.
class TrainedLssvm {
public:
    TrainedLssvm(Eigen::VectorXd alpha, double b, RowMatrix train_x, KernelSpec kernel, double C,
                 std::optional<Normalization> norm, std::vector<std::string> feature_names = {});

    const Eigen::VectorXd& alpha() const { return alpha_; }
    double b() const { return b_; }
    // Raw (un-normalized) training inputs.
    const RowMatrix& train_x() const { return train_x_; }
    const KernelSpec& kernel() const { return kernel_; }
    double C() const { return C_; }
    const std::optional<Normalization>& norm() const { return norm_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    std::size_t input_dim() const { return static_cast<std::size_t>(train_x_.cols()); }
    std::size_t size() const { return static_cast<std::size_t>(train_x_.rows()); }

    double predict(std::span<const double> x) const;
    Eigen::VectorXd predict(const RowMatrix& X) const;

private:
    Eigen::VectorXd alpha_;
    double b_;
    RowMatrix train_x_;
    RowMatrix train_z_;  // normalized copy used by the kernel
    KernelSpec kernel_;
    double C_;
    std::optional<Normalization> norm_;
    std::vector<std::string> feature_names_;
};

// Solves the bordered system
//   [0  1^T      ] [b]   [0]
//   [1  K + I/C  ] [a] = [Y]
// through a Cholesky factorization of H = K + I/C:
//   b = 1^T H^-1 Y / 1^T H^-1 1,  alpha = H^-1 (Y - 1 b).
// Throws ConditioningError when H is not numerically positive definite.
TrainedLssvm train(const Dataset& data, const KernelSpec& k, double C);

double predict(const TrainedLssvm& model, std::span<const double> x);

// Optimality diagnostics for a fitted model against its training targets.
struct KktDiagnostics {
    double residual;   // max-norm residual of the bordered system / max(max|Y|, 1)
    double dual_sum;   // |sum alpha|
    double dual_bound; // 1e-10 (1 + max|alpha| l), the tolerance dual_sum must meet
};
KktDiagnostics kkt_diagnostics(const TrainedLssvm& model, const Eigen::VectorXd& Y);

// k-fold grid search over C (and sigma for Rbf). Folds come from a seeded
// shuffle of the sample indices.
struct GridSearchResult {
    KernelSpec kernel;
    double C;
    double cv_mse;
};
struct GridSearchOptions {
    std::vector<double> C_grid{1e-1, 1e0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6};
    // Multipliers applied to the median-heuristic sigma.
    std::vector<double> sigma_scale_grid{0.125, 0.25, 0.5, 1.0, 2.0, 4.0};
    int folds = 5;
    std::uint64_t seed = 0;
};
GridSearchResult grid_search(const Dataset& data, const KernelSpec& family,
                             const GridSearchOptions& opts = {});

}  // namespace greyvalve
