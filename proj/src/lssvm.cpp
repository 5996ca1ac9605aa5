#include "greyvalve/lssvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Cholesky>

#include "greyvalve/error.hpp"

namespace greyvalve {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::span<const double> row_span(const RowMatrix& m, Eigen::Index i) {
    return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// One step of iterative refinement on top of the Cholesky solve.
Eigen::VectorXd refined_solve(const Eigen::MatrixXd& H, const Eigen::LLT<Eigen::MatrixXd>& llt,
                              const Eigen::VectorXd& rhs) {
    Eigen::VectorXd x = llt.solve(rhs);
    const Eigen::VectorXd r = rhs - H.selfadjointView<Eigen::Lower>() * x;
    x += llt.solve(r);
    return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// Normalization / Dataset
// ---------------------------------------------------------------------------

Normalization Normalization::fit(const RowMatrix& X) {
    const auto n = static_cast<std::size_t>(X.cols());
    const auto l = static_cast<double>(X.rows());
    Normalization norm;
    norm.mean.assign(n, 0.0);
    norm.std.assign(n, 1.0);
    if (X.rows() == 0) return norm;
    for (std::size_t j = 0; j < n; ++j) {
        const auto col = X.col(static_cast<Eigen::Index>(j));
        const double m = col.sum() / l;
        const double var = (col.array() - m).square().sum() / l;
        norm.mean[j] = m;
        const double s = std::sqrt(var);
        norm.std[j] = (s > 0.0 && std::isfinite(s)) ? s : 1.0;
    }
    return norm;
}

RowMatrix Normalization::apply(const RowMatrix& X) const {
    if (static_cast<std::size_t>(X.cols()) != dim()) {
        throw InputError("normalization: expected " + std::to_string(dim()) + " features, got " +
                         std::to_string(X.cols()));
    }
    RowMatrix Z(X.rows(), X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            const auto uj = static_cast<std::size_t>(j);
            Z(i, j) = (X(i, j) - mean[uj]) / std[uj];
        }
    }
    return Z;
}

void Normalization::apply_inplace(std::span<double> x) const {
    if (x.size() != dim()) {
        throw InputError("normalization: expected " + std::to_string(dim()) + " features, got " +
                         std::to_string(x.size()));
    }
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = (x[j] - mean[j]) / std[j];
}

void Dataset::validate() const {
    if (X.rows() < 1) throw InputError("dataset: need at least one sample");
    if (X.cols() < 1) throw InputError("dataset: need at least one feature");
    if (Y.size() != X.rows()) {
        throw InputError("dataset: " + std::to_string(X.rows()) + " input rows but " +
                         std::to_string(Y.size()) + " targets");
    }
    if (!X.allFinite()) throw InputError("dataset: non-finite input value");
    if (!Y.allFinite()) throw InputError("dataset: non-finite target value");
    if (norm && norm->dim() != dim()) throw InputError("dataset: normalization dimension mismatch");
    if (!feature_names.empty() && feature_names.size() != dim()) {
        throw InputError("dataset: feature_names length does not match input dimension");
    }
}

RowMatrix Dataset::inputs() const { return norm ? norm->apply(X) : X; }

Dataset Dataset::normalized() const {
    Dataset d = *this;
    d.norm = Normalization::fit(X);
    return d;
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

void validate_kernel(const KernelSpec& k) {
    std::visit(overloaded{
                   [](const RbfKernel& r) {
                       if (!(r.sigma > 0.0) || !std::isfinite(r.sigma))
                           throw InputError("rbf kernel: sigma must be > 0");
                   },
                   [](const LinearKernel&) {},
                   [](const PolynomialKernel& p) {
                       if (p.degree < 1) throw InputError("polynomial kernel: degree must be >= 1");
                       if (!(p.offset >= 0.0) || !std::isfinite(p.offset))
                           throw InputError("polynomial kernel: offset must be >= 0");
                   },
               },
               k);
}

std::string kernel_name(const KernelSpec& k) {
    return std::visit(overloaded{
                          [](const RbfKernel&) { return std::string("rbf"); },
                          [](const LinearKernel&) { return std::string("linear"); },
                          [](const PolynomialKernel&) { return std::string("poly"); },
                      },
                      k);
}

double kernel_eval(const KernelSpec& k, std::span<const double> x, std::span<const double> x2) {
    if (x.size() != x2.size()) {
        throw InputError("kernel_eval: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                         std::to_string(x2.size()) + ")");
    }
    return std::visit(overloaded{
                          [&](const RbfKernel& r) {
                              return std::exp(-squared_distance(x, x2) / (2.0 * r.sigma * r.sigma));
                          },
                          [&](const LinearKernel&) { return dot(x, x2); },
                          [&](const PolynomialKernel& p) {
                              const double base = dot(x, x2) + p.offset;
                              double v = 1.0;
                              for (int i = 0; i < p.degree; ++i) v *= base;
                              return v;
                          },
                      },
                      k);
}

Eigen::MatrixXd gram_matrix(const RowMatrix& Z, const KernelSpec& k) {
    validate_kernel(k);
    const Eigen::Index l = Z.rows();
    Eigen::MatrixXd K(l, l);
    for (Eigen::Index j = 0; j < l; ++j) {
        const auto zj = row_span(Z, j);
        for (Eigen::Index i = j; i < l; ++i) {
            const double v = kernel_eval(k, row_span(Z, i), zj);
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

Eigen::MatrixXd gram_matrix(const Dataset& data, const KernelSpec& k) {
    data.validate();
    return gram_matrix(data.inputs(), k);
}

double median_pairwise_distance(const RowMatrix& Z, std::size_t max_rows) {
    const auto l = static_cast<std::size_t>(Z.rows());
    if (l < 2) return 1.0;
    const std::size_t stride = max_rows > 0 ? (l + max_rows - 1) / max_rows : 1;
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < l; i += stride) rows.push_back(static_cast<Eigen::Index>(i));

    std::vector<double> d;
    d.reserve(rows.size() * (rows.size() - 1) / 2);
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = a + 1; b < rows.size(); ++b) {
            d.push_back(std::sqrt(squared_distance(row_span(Z, rows[a]), row_span(Z, rows[b]))));
        }
    }
    if (d.empty()) return 1.0;
    const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    double med = *mid;
    if (d.size() % 2 == 0) {
        const double lower = *std::max_element(d.begin(), mid);
        med = 0.5 * (med + lower);
    }
    return med > 0.0 ? med : 1.0;
}

RbfKernel median_heuristic_rbf(const Dataset& data) {
    return RbfKernel{median_pairwise_distance(data.inputs())};
}

// ---------------------------------------------------------------------------
// TrainedLssvm
// ---------------------------------------------------------------------------

TrainedLssvm::TrainedLssvm(Eigen::VectorXd alpha, double b, RowMatrix train_x, KernelSpec kernel,
                           double C, std::optional<Normalization> norm,
                           std::vector<std::string> feature_names)
    : alpha_(std::move(alpha)),
      b_(b),
      train_x_(std::move(train_x)),
      kernel_(kernel),
      C_(C),
      norm_(std::move(norm)),
      feature_names_(std::move(feature_names)) {
    validate_kernel(kernel_);
    if (alpha_.size() != train_x_.rows()) {
        throw InputError("lssvm model: alpha length does not match training rows");
    }
    if (train_x_.rows() < 1) throw InputError("lssvm model: empty training set");
    if (!(C_ > 0.0)) throw InputError("lssvm model: C must be > 0");
    if (norm_ && norm_->dim() != input_dim()) {
        throw InputError("lssvm model: normalization dimension mismatch");
    }
    if (!feature_names_.empty() && feature_names_.size() != input_dim()) {
        throw InputError("lssvm model: feature_names length does not match input dimension");
    }
    train_z_ = norm_ ? norm_->apply(train_x_) : train_x_;
}

double TrainedLssvm::predict(std::span<const double> x) const {
    if (x.size() != input_dim()) {
        throw InputError("lssvm predict: expected " + std::to_string(input_dim()) +
                         " features, got " + std::to_string(x.size()));
    }
    std::vector<double> z(x.begin(), x.end());
    if (norm_) norm_->apply_inplace(z);
    double f = b_;
    for (Eigen::Index i = 0; i < train_z_.rows(); ++i) {
        f += alpha_[i] * kernel_eval(kernel_, z, row_span(train_z_, i));
    }
    return f;
}

Eigen::VectorXd TrainedLssvm::predict(const RowMatrix& X) const {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = predict(row_span(X, i));
    return out;
}

double predict(const TrainedLssvm& model, std::span<const double> x) { return model.predict(x); }

TrainedLssvm train(const Dataset& data, const KernelSpec& k, double C) {
    data.validate();
    validate_kernel(k);
    if (!(C > 0.0) || !std::isfinite(C)) throw InputError("train: C must be a finite value > 0");

    const RowMatrix Z = data.inputs();
    const Eigen::Index l = Z.rows();
    Eigen::MatrixXd H = gram_matrix(Z, k);
    H.diagonal().array() += 1.0 / C;

    const Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) {
        throw ConditioningError("train: Cholesky factorization of K + I/C failed (l = " +
                                std::to_string(l) + ", C = " + std::to_string(C) + ")");
    }

    // Centering Y leaves H^-1 (Y - 1 b) unchanged and keeps H^-1 Y small.
    const double y_mean = data.Y.mean();
    const Eigen::VectorXd yc = data.Y.array() - y_mean;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(l);
    const Eigen::VectorXd eta = refined_solve(H, llt, ones);
    const Eigen::VectorXd nu = refined_solve(H, llt, yc);

    const double s = eta.sum();
    if (!(s > 0.0) || !std::isfinite(s) || !nu.allFinite()) {
        throw ConditioningError("train: solve of H x = 1 produced 1^T H^-1 1 = " +
                                std::to_string(s));
    }
    double shift = nu.sum() / s;
    Eigen::VectorXd alpha = nu - eta * shift;
    // Second pass absorbs the rounding left in sum(alpha).
    const double drift = alpha.sum() / s;
    alpha -= eta * drift;
    shift += drift;

    return TrainedLssvm(std::move(alpha), y_mean + shift, data.X, k, C, data.norm,
                        data.feature_names);
}

KktDiagnostics kkt_diagnostics(const TrainedLssvm& model, const Eigen::VectorXd& Y) {
    if (Y.size() != static_cast<Eigen::Index>(model.size())) {
        throw InputError("kkt_diagnostics: target length does not match model");
    }
    const RowMatrix Z = model.norm() ? model.norm()->apply(model.train_x()) : model.train_x();
    Eigen::MatrixXd H = gram_matrix(Z, model.kernel());
    H.diagonal().array() += 1.0 / model.C();
    const Eigen::VectorXd& a = model.alpha();
    const Eigen::VectorXd r = (H * a).array() + model.b() - Y.array();
    const double scale = std::max(Y.cwiseAbs().maxCoeff(), 1.0);
    const double row0 = std::abs(a.sum());
    KktDiagnostics d;
    d.residual = std::max(row0, r.cwiseAbs().maxCoeff()) / scale;
    d.dual_sum = row0;
    d.dual_bound = 1e-10 * (1.0 + a.cwiseAbs().maxCoeff() * static_cast<double>(a.size()));
    return d;
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

GridSearchResult grid_search(const Dataset& data, const KernelSpec& family,
                             const GridSearchOptions& opts) {
    data.validate();
    const auto l = data.size();
    if (opts.folds < 2 || l < static_cast<std::size_t>(opts.folds)) {
        throw InputError("grid_search: need at least 2 folds and one sample per fold");
    }
    if (opts.C_grid.empty()) throw InputError("grid_search: empty C grid");

    std::vector<std::size_t> order(l);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(opts.seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> fold_of(l);
    for (std::size_t i = 0; i < l; ++i) fold_of[order[i]] = static_cast<int>(i % opts.folds);

    std::vector<KernelSpec> kernels;
    if (std::holds_alternative<RbfKernel>(family)) {
        const double base = median_heuristic_rbf(data).sigma;
        for (double s : opts.sigma_scale_grid) kernels.push_back(RbfKernel{base * s});
    } else {
        kernels.push_back(family);
    }

    GridSearchResult best{family, opts.C_grid.front(), std::numeric_limits<double>::infinity()};
    for (const auto& k : kernels) {
        for (double C : opts.C_grid) {
            double sse = 0.0;
            bool failed = false;
            for (int f = 0; f < opts.folds && !failed; ++f) {
                std::vector<Eigen::Index> tr, te;
                for (std::size_t i = 0; i < l; ++i) {
                    (fold_of[i] == f ? te : tr).push_back(static_cast<Eigen::Index>(i));
                }
                Dataset part;
                part.X = data.X(tr, Eigen::all);
                part.Y = data.Y(tr);
                part.norm = data.norm;
                try {
                    const auto m = train(part, k, C);
                    const RowMatrix Xte = data.X(te, Eigen::all);
                    const Eigen::VectorXd err = m.predict(Xte) - data.Y(te);
                    sse += err.squaredNorm();
                } catch (const ConditioningError&) {
                    failed = true;
                }
            }
            const double mse = failed ? std::numeric_limits<double>::infinity()
                                      : sse / static_cast<double>(l);
            if (mse < best.cv_mse) best = {k, C, mse};
        }
    }
    if (!std::isfinite(best.cv_mse)) throw ConditioningError("grid_search: every candidate failed");
    return best;
}

}  // namespace greyvalve
