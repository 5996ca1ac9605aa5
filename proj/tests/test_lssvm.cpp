#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "greyvalve/error.hpp"
#include "greyvalve/lssvm.hpp"
#include "oracles.hpp"

using namespace greyvalve;

namespace {

Dataset make_dataset(const std::vector<std::vector<double>>& X, const std::vector<double>& Y) {
    Dataset d;
    d.X = oracle::to_matrix(X);
    d.Y = Eigen::Map<const Eigen::VectorXd>(Y.data(), static_cast<Eigen::Index>(Y.size()));
    return d;
}

struct RandomProblem {
    std::vector<std::vector<double>> X;
    std::vector<double> Y;
};

RandomProblem random_problem(std::mt19937_64& rng, std::size_t l, std::size_t n) {
    std::normal_distribution<double> g(0.0, 1.0);
    RandomProblem p;
    for (std::size_t i = 0; i < l; ++i) {
        std::vector<double> x(n);
        for (auto& v : x) v = g(rng);
        p.X.push_back(x);
        p.Y.push_back(std::sin(x[0]) + 0.3 * g(rng) + 2.0);
    }
    return p;
}

}  // namespace

TEST_CASE("kernel examples", "[lssvm]") {
    const std::vector<double> a{1.0, 2.0}, b{3.0, 4.0};
    REQUIRE(kernel_eval(RbfKernel{0.7}, a, a) == 1.0);
    REQUIRE(kernel_eval(LinearKernel{}, a, b) == 11.0);
    const std::vector<double> o{0.0, 0.0}, p{2.0, 0.0};
    REQUIRE(kernel_eval(RbfKernel{1.0}, o, p) == Catch::Approx(std::exp(-2.0)).epsilon(1e-15));
    REQUIRE(kernel_eval(PolynomialKernel{3, 1.0}, a, b) == 1728.0);
    REQUIRE(kernel_eval(RbfKernel{1.3}, a, b) == kernel_eval(RbfKernel{1.3}, b, a));
    REQUIRE_THROWS_AS(kernel_eval(LinearKernel{}, a, std::vector<double>{1.0}), InputError);
}

TEST_CASE("kernel validation", "[lssvm]") {
    REQUIRE_THROWS_AS(validate_kernel(RbfKernel{0.0}), InputError);
    REQUIRE_THROWS_AS(validate_kernel(PolynomialKernel{0, 1.0}), InputError);
    REQUIRE_THROWS_AS(validate_kernel(PolynomialKernel{2, -1.0}), InputError);
}

TEST_CASE("gram matrix structure", "[lssvm]") {
    auto single = make_dataset({{0.3, 0.1}}, {1.0});
    const auto K1 = gram_matrix(single, LinearKernel{});
    REQUIRE(K1.rows() == 1);
    REQUIRE(K1(0, 0) == Catch::Approx(0.1));

    std::mt19937_64 rng(17);
    const auto p = random_problem(rng, 12, 3);
    const auto d = make_dataset(p.X, p.Y);
    const auto K = gram_matrix(d, RbfKernel{0.9});
    REQUIRE(K == K.transpose());
    for (Eigen::Index i = 0; i < K.rows(); ++i) REQUIRE(K(i, i) == 1.0);
    for (std::size_t i = 0; i < p.X.size(); ++i) {
        for (std::size_t j = 0; j < p.X.size(); ++j) {
            REQUIRE(K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
                    Catch::Approx(oracle::rbf(p.X[i], p.X[j], 0.9)).epsilon(1e-14));
        }
    }
}

TEST_CASE("gram matrix is positive semidefinite", "[lssvm][property]") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t l = 2 + static_cast<std::size_t>(trial % 9);
        const auto p = random_problem(rng, l, 1 + trial % 4);
        const auto d = make_dataset(p.X, p.Y);
        REQUIRE(oracle::min_eigenvalue(gram_matrix(d, RbfKernel{0.5 + 0.1 * trial})) >= -1e-10);
        REQUIRE(oracle::min_eigenvalue(gram_matrix(d, PolynomialKernel{1 + trial % 3, 0.5})) >= -1e-10);
    }
}

TEST_CASE("hand-solved two-point linear model", "[lssvm]") {
    const auto d = make_dataset({{0.0}, {1.0}}, {0.0, 1.0});
    const auto m = train(d, LinearKernel{}, 2.0);
    REQUIRE(std::abs(m.b() - 0.25) < 1e-12);
    REQUIRE(std::abs(m.alpha()[0] + 0.5) < 1e-12);
    REQUIRE(std::abs(m.alpha()[1] - 0.5) < 1e-12);
    REQUIRE(std::abs(m.predict(std::vector<double>{0.0}) - 0.25) < 1e-12);
    REQUIRE(std::abs(m.predict(std::vector<double>{1.0}) - 0.75) < 1e-12);
    REQUIRE(std::abs(predict(m, std::vector<double>{2.0}) - 1.25) < 1e-12);
}

TEST_CASE("single sample model is constant", "[lssvm]") {
    const auto d = make_dataset({{0.4, -1.0}}, {3.5});
    for (const KernelSpec& k : {KernelSpec{RbfKernel{1.0}}, KernelSpec{LinearKernel{}},
                                KernelSpec{PolynomialKernel{2, 1.0}}}) {
        for (double C : {1e-3, 1.0, 1e6}) {
            const auto m = train(d, k, C);
            REQUIRE(std::abs(m.alpha()[0]) < 1e-15);
            REQUIRE(m.b() == Catch::Approx(3.5).epsilon(1e-15));
            REQUIRE(m.predict(std::vector<double>{10.0, 2.0}) == Catch::Approx(3.5).epsilon(1e-14));
        }
    }
}

TEST_CASE("all-zero duals predict the bias", "[lssvm]") {
    TrainedLssvm m(Eigen::VectorXd::Zero(3), 1.75, oracle::to_matrix({{0.0}, {1.0}, {2.0}}),
                   RbfKernel{1.0}, 1.0, std::nullopt);
    for (double x : {-3.0, 0.0, 0.5, 9.0}) REQUIRE(m.predict(std::vector<double>{x}) == 1.75);
}

TEST_CASE("closed form matches the bordered system", "[lssvm][property]") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> logC(-2.0, 4.0);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t l = 2 + rng() % 49;
        const std::size_t n = 1 + rng() % 5;
        const auto p = random_problem(rng, l, n);
        const double C = std::pow(10.0, logC(rng));
        const double sigma = 0.5 + (rng() % 100) / 50.0;
        const auto d = make_dataset(p.X, p.Y);
        const auto m = train(d, RbfKernel{sigma}, C);
        const auto [b, alpha] = oracle::bordered_solve(
            p.X, p.Y, C, [&](const auto& a, const auto& c) { return oracle::rbf(a, c, sigma); });
        REQUIRE(std::abs(m.b() - b) <= 1e-8 * (1.0 + std::abs(b)));
        for (std::size_t i = 0; i < l; ++i) {
            REQUIRE(std::abs(m.alpha()[static_cast<Eigen::Index>(i)] - alpha[i]) <=
                    1e-8 * (1.0 + std::abs(alpha[i])));
        }
        const auto kkt = kkt_diagnostics(m, d.Y);
        REQUIRE(kkt.residual <= 1e-8);
        REQUIRE(kkt.dual_sum <= kkt.dual_bound);
    }
}

TEST_CASE("interpolation error shrinks as C grows", "[lssvm][property]") {
    std::vector<std::vector<double>> X;
    std::vector<double> Y;
    for (int i = 0; i < 20; ++i) {
        const double x = -2.0 + 4.0 * i / 19.0;
        X.push_back({x});
        Y.push_back(std::sin(2 * x) + 0.5 * x);
    }
    const auto d = make_dataset(X, Y);
    double prev = INFINITY;
    for (double C : {1.0, 1e2, 1e4, 1e6}) {
        const auto m = train(d, RbfKernel{0.5}, C);
        const double err = (m.predict(d.X) - d.Y).cwiseAbs().maxCoeff();
        REQUIRE(err <= prev);
        prev = err;
    }
    REQUIRE(prev < 1e-3);
}

TEST_CASE("vanishing C gives a constant predictor", "[lssvm][property]") {
    std::mt19937_64 rng(7);
    const auto p = random_problem(rng, 30, 2);
    const auto d = make_dataset(p.X, p.Y);
    const auto m = train(d, RbfKernel{1.0}, 1e-12);
    REQUIRE(m.alpha().cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::VectorXd pred = m.predict(d.X);
    REQUIRE(pred.maxCoeff() - pred.minCoeff() < 1e-6);
    REQUIRE(m.b() == Catch::Approx(d.Y.mean()).epsilon(1e-6));
}

TEST_CASE("permuting samples does not change predictions", "[lssvm][property]") {
    std::mt19937_64 rng(9);
    const auto p = random_problem(rng, 25, 3);
    std::vector<std::size_t> perm(p.X.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    RandomProblem q;
    for (auto i : perm) {
        q.X.push_back(p.X[i]);
        q.Y.push_back(p.Y[i]);
    }
    const auto m1 = train(make_dataset(p.X, p.Y).normalized(), RbfKernel{1.2}, 50.0);
    const auto m2 = train(make_dataset(q.X, q.Y).normalized(), RbfKernel{1.2}, 50.0);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> x{g(rng), g(rng), g(rng)};
        REQUIRE(std::abs(m1.predict(x) - m2.predict(x)) <= 1e-10);
    }
}

TEST_CASE("duplicate points with conflicting targets train", "[lssvm]") {
    const auto d = make_dataset({{1.0}, {1.0}, {2.0}}, {0.0, 1.0, 2.0});
    const auto m = train(d, RbfKernel{1.0}, 1e3);
    REQUIRE(std::isfinite(m.b()));
    REQUIRE(std::abs(m.predict(std::vector<double>{1.0}) - 0.5) < 1e-2);
}

TEST_CASE("normalization is applied at prediction", "[lssvm]") {
    std::vector<std::vector<double>> X;
    std::vector<double> Y;
    for (int i = 0; i < 15; ++i) {
        X.push_back({500.0 + 10.0 * i, 0.01 * i});
        Y.push_back(0.3 * i);
    }
    const auto d = make_dataset(X, Y).normalized();
    REQUIRE(d.norm->mean[0] == Catch::Approx(570.0));
    const auto m = train(d, RbfKernel{1.0}, 1e6);
    for (std::size_t i = 0; i < X.size(); ++i) REQUIRE(std::abs(m.predict(X[i]) - Y[i]) < 1e-3);
}

TEST_CASE("median heuristic", "[lssvm]") {
    const auto Z = oracle::to_matrix({{0.0}, {1.0}, {3.0}});
    // distances 1, 2, 3
    REQUIRE(median_pairwise_distance(Z) == 2.0);
    const auto Z4 = oracle::to_matrix({{0.0}, {1.0}, {3.0}, {7.0}});
    // 1,2,3,4,6,7 -> (3 + 4) / 2
    REQUIRE(median_pairwise_distance(Z4) == 3.5);
    REQUIRE(median_pairwise_distance(oracle::to_matrix({{2.0}})) == 1.0);
    REQUIRE(median_pairwise_distance(oracle::to_matrix({{2.0}, {2.0}})) == 1.0);
}

TEST_CASE("dataset and training input errors", "[lssvm]") {
    Dataset empty;
    REQUIRE_THROWS_AS(train(empty, LinearKernel{}, 1.0), InputError);
    auto d = make_dataset({{0.0}, {1.0}}, {0.0, 1.0});
    REQUIRE_THROWS_AS(train(d, LinearKernel{}, 0.0), InputError);
    REQUIRE_THROWS_AS(train(d, LinearKernel{}, -1.0), InputError);
    d.X(0, 0) = NAN;
    REQUIRE_THROWS_AS(train(d, LinearKernel{}, 1.0), InputError);
    const auto ok = train(make_dataset({{0.0}, {1.0}}, {0.0, 1.0}), LinearKernel{}, 1.0);
    REQUIRE_THROWS_AS(ok.predict(std::vector<double>{1.0, 2.0}), InputError);
}

TEST_CASE("grid search picks a finite candidate", "[lssvm]") {
    std::vector<std::vector<double>> X;
    std::vector<double> Y;
    for (int i = 0; i < 40; ++i) {
        const double x = i / 39.0;
        X.push_back({x});
        Y.push_back(std::sin(6 * x));
    }
    const auto d = make_dataset(X, Y).normalized();
    const auto r = grid_search(d, RbfKernel{1.0});
    REQUIRE(std::isfinite(r.cv_mse));
    REQUIRE(r.cv_mse < 0.05);
    const auto r2 = grid_search(d, RbfKernel{1.0});
    REQUIRE(r2.C == r.C);
    REQUIRE(std::get<RbfKernel>(r2.kernel).sigma == std::get<RbfKernel>(r.kernel).sigma);
}
