#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "greyvalve/error.hpp"
#include "greyvalve/hybrid.hpp"
#include "greyvalve/metrics.hpp"
#include "greyvalve/simulator.hpp"

using namespace greyvalve;

namespace {

ValveGeometry geometry() { return ValveGeometry{0.0, 0.5, 0.95, 1.0, 0.9}; }

// Synthetic telemetry whose flow follows the orifice equation with a known
// nonnegative area function of the stroke.
std::vector<HybridSample> synthetic(std::size_t n, FeatureSet fs, std::uint64_t seed,
                                    const ValveGeometry& g = geometry()) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<HybridSample> out;
    const auto fluid = FluidProperties::water();
    for (std::size_t i = 0; i < n; ++i) {
        const double p1 = 450.0 + 100.0 * u(rng);
        const double p2 = 250.0 + 80.0 * u(rng);
        const double x = 0.05 + 0.9 * u(rng);
        const double area = 5e-4 * (0.2 * x + 0.8 * x * x);
        ValveGeometry gg = g;
        gg.Ac = area;
        const double q = orifice_flow(gg, p1, p2, fluid.rho1);
        std::vector<double> f{p1, p2, x};
        if (fs == FeatureSet::P1P2XT) f.push_back(290.0 + 20.0 * u(rng));
        out.push_back(HybridSample::from_features(f, q));
    }
    return out;
}

double training_mape(const HybridValveModel& m, const std::vector<HybridSample>& data) {
    std::vector<double> y, yhat;
    for (const auto& s : data) {
        y.push_back(s.q);
        yhat.push_back(m.predict_flow(s.features));
    }
    return evaluate(y, yhat).mape;
}

}  // namespace

TEST_CASE("feature set metadata", "[hybrid]") {
    REQUIRE(arity(FeatureSet::P1P2X) == 3);
    REQUIRE(arity(FeatureSet::P1P2XT) == 4);
    REQUIRE(feature_names(FeatureSet::P1P2XT).back() == "temp");
    REQUIRE(parse_feature_set("p1p2xt") == FeatureSet::P1P2XT);
    REQUIRE_THROWS_AS(parse_feature_set("p1p2"), InputError);
}

TEST_CASE("area target examples", "[hybrid]") {
    ValveGeometry unit{0.0, 0.0, 1.0, 1.0, 1.0};
    auto s = HybridSample::from_features({100.5, 100.0, 0.5}, 1.0);
    REQUIRE(area_target(s, unit, 1000.0) == Catch::Approx(1.0).epsilon(1e-14));
    s.q = 0.0;
    REQUIRE(area_target(s, unit, 1000.0) == 0.0);

    auto flat = HybridSample::from_features({100.0, 100.0, 0.5}, 0.0);
    REQUIRE(area_target(flat, unit, 1000.0) == 0.0);
    flat.q = 0.1;
    REQUIRE_THROWS_AS(area_target(flat, unit, 1000.0), InconsistentSampleError);
    auto reversed = HybridSample::from_features({90.0, 100.0, 0.5}, 0.0);
    REQUIRE_THROWS_AS(area_target(reversed, unit, 1000.0), InconsistentSampleError);
}

TEST_CASE("area target inverts the orifice equation", "[hybrid][property]") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        ValveGeometry g{1e-3 * u(rng), 0.95 * u(rng), 0.3 + 0.7 * u(rng), 0.2 + 0.8 * u(rng), 0.9};
        const double p2 = 10.0 + 500.0 * u(rng);
        const double p1 = p2 + 0.1 + 1000.0 * u(rng);
        const double rho = 500.0 + 1000.0 * u(rng);
        const double q = orifice_flow(g, p1, p2, rho);
        const double f = area_target(HybridSample::from_features({p1, p2, 0.5}, q), g, rho);
        REQUIRE(std::abs(f - g.Ac) <= 1e-12 * std::max(g.Ac, 1e-300) + 1e-300);
    }
}

TEST_CASE("hybrid round trip on synthetic data", "[hybrid][property]") {
    const auto data = synthetic(300, FeatureSet::P1P2X, 1);
    HybridOptions opts;
    opts.auto_sigma = true;
    const auto m = fit_hybrid(data, FeatureSet::P1P2X, geometry(), FluidProperties::water(),
                              RbfKernel{1.0}, 1e6, opts);
    REQUIRE(training_mape(m, data) < 1.0);
    REQUIRE(m.area_model().size() == 300);
}

TEST_CASE("constant area target gives a constant area model", "[hybrid]") {
    std::vector<HybridSample> data;
    const auto fluid = FluidProperties::water();
    ValveGeometry g = geometry();
    g.Ac = 5e-4;
    const double q = orifice_flow(g, 500.0, 300.0, fluid.rho1);
    for (int i = 0; i < 20; ++i) data.push_back(HybridSample::from_features({500.0, 300.0, 1.0}, q));
    const auto m = fit_hybrid(data, FeatureSet::P1P2X, geometry(), fluid, RbfKernel{1.0}, 1e6);
    REQUIRE(m.predict_area(std::vector<double>{500.0, 300.0, 1.0}) == Catch::Approx(5e-4).epsilon(1e-10));
    REQUIRE(m.predict_flow(std::vector<double>{500.0, 300.0, 1.0}) == Catch::Approx(q).epsilon(1e-10));
}

TEST_CASE("two-sample hybrid reproduces both flows", "[hybrid]") {
    const auto data = synthetic(2, FeatureSet::P1P2X, 5);
    const auto m = fit_hybrid(data, FeatureSet::P1P2X, geometry(), FluidProperties::water(),
                              RbfKernel{1.0}, 1e6);
    for (const auto& s : data) REQUIRE(std::abs(m.predict_flow(s.features) - s.q) / s.q < 1e-3);
}

TEST_CASE("flows are nonnegative and zero for a zero area model", "[hybrid]") {
    TrainedLssvm zero(Eigen::VectorXd::Zero(2), 0.0, RowMatrix::Zero(2, 3), RbfKernel{1.0}, 1.0,
                      std::nullopt);
    HybridValveModel m(geometry(), FluidProperties::water(), {}, FeatureSet::P1P2X, 0, zero);
    REQUIRE(predict_flow(m, std::vector<double>{500.0, 300.0, 0.4}) == 0.0);

    TrainedLssvm negative(Eigen::VectorXd::Zero(2), -1e-3, RowMatrix::Zero(2, 3), RbfKernel{1.0},
                          1.0, std::nullopt);
    HybridValveModel mn(geometry(), FluidProperties::water(), {}, FeatureSet::P1P2X, 0, negative);
    REQUIRE(mn.predict_flow(std::vector<double>{500.0, 300.0, 0.4}) == 0.0);
}

TEST_CASE("predicted flow scales with sqrt of the pressure drop", "[hybrid]") {
    TrainedLssvm constant(Eigen::VectorXd::Zero(1), 3e-4, RowMatrix::Zero(1, 3), LinearKernel{}, 1.0,
                          std::nullopt);
    HybridValveModel m(geometry(), FluidProperties::water(), {}, FeatureSet::P1P2X, 0, constant);
    const double q1 = m.predict_flow(std::vector<double>{400.0, 300.0, 0.5});
    const double q2 = m.predict_flow(std::vector<double>{500.0, 300.0, 0.5});
    REQUIRE(std::abs(q2 / q1 - std::sqrt(2.0)) < 1e-12 * std::sqrt(2.0));
}

TEST_CASE("mechanism and data parts compose multiplicatively", "[hybrid][property]") {
    const auto data = synthetic(80, FeatureSet::P1P2X, 3);
    auto g = geometry();
    const auto m1 = fit_hybrid(data, FeatureSet::P1P2X, g, FluidProperties::water(), RbfKernel{1.0}, 1e3);
    g.Cv *= 0.5;  // s = 0.5: targets double, flows unchanged
    const auto m2 = fit_hybrid(data, FeatureSet::P1P2X, g, FluidProperties::water(), RbfKernel{1.0}, 1e3);
    for (const auto& s : synthetic(30, FeatureSet::P1P2X, 99)) {
        const double a = m1.predict_flow(s.features);
        const double b = m2.predict_flow(s.features);
        REQUIRE(std::abs(a - b) <= 1e-9 * std::abs(a));
    }
}

TEST_CASE("temperature feature is harmless on temperature-independent data", "[hybrid][property]") {
    const auto d4 = synthetic(200, FeatureSet::P1P2XT, 8);
    std::vector<HybridSample> d3;
    for (const auto& s : d4) {
        d3.push_back(HybridSample::from_features({s.features[0], s.features[1], s.features[2]}, s.q));
    }
    HybridOptions opts;
    opts.auto_sigma = true;
    const auto m3 = fit_hybrid(d3, FeatureSet::P1P2X, geometry(), FluidProperties::water(), RbfKernel{}, 1e6, opts);
    const auto m4 = fit_hybrid(d4, FeatureSet::P1P2XT, geometry(), FluidProperties::water(), RbfKernel{}, 1e6, opts);
    for (std::size_t i = 0; i < d4.size(); ++i) {
        const double a = m3.predict_flow(d3[i].features);
        const double b = m4.predict_flow(d4[i].features);
        REQUIRE(std::abs(a - b) / d4[i].q < 0.01);
    }
}

TEST_CASE("density law only applies with the temperature feature", "[hybrid]") {
    DensityLaw law;
    law.enabled = true;
    const auto fluid = FluidProperties::water();
    const std::vector<double> f4{500.0, 300.0, 0.5, 343.15};
    REQUIRE(mechanism_density(FeatureSet::P1P2XT, law, fluid, f4) ==
            Catch::Approx(law.rho_ref * (1 - law.alpha_T * 50.0)));
    REQUIRE(mechanism_density(FeatureSet::P1P2X, law, fluid, f4) == fluid.rho1);
    law.enabled = false;
    REQUIRE(mechanism_density(FeatureSet::P1P2XT, law, fluid, f4) == fluid.rho1);
}

TEST_CASE("fit_hybrid lists inconsistent samples", "[hybrid]") {
    auto data = synthetic(10, FeatureSet::P1P2X, 4);
    data[3].features[0] = data[3].features[1] - 1.0;
    data[3].pvc = data[3].features[1];
    data[7].features[0] = data[7].features[1];
    data[7].pvc = data[7].features[1];
    try {
        fit_hybrid(data, FeatureSet::P1P2X, geometry(), FluidProperties::water(), RbfKernel{1.0}, 10.0);
        FAIL("expected InconsistentSampleError");
    } catch (const InconsistentSampleError& e) {
        REQUIRE(e.indices() == std::vector<std::size_t>{3, 7});
    }
    REQUIRE_THROWS_AS(fit_hybrid(std::span(data).first(1), FeatureSet::P1P2X, geometry(),
                                 FluidProperties::water(), RbfKernel{1.0}, 10.0),
                      InputError);
    const auto good = synthetic(10, FeatureSet::P1P2X, 4);
    REQUIRE_THROWS_AS(fit_hybrid(good, FeatureSet::P1P2XT, geometry(), FluidProperties::water(),
                                 RbfKernel{1.0}, 10.0),
                      InconsistentSampleError);
}

TEST_CASE("lagged features widen the area model input", "[hybrid]") {
    auto base = synthetic(50, FeatureSet::P1P2X, 12);
    std::vector<HybridSample> lagged;
    for (std::size_t i = 1; i < base.size(); ++i) {
        auto f = base[i].features;
        f.insert(f.end(), base[i - 1].features.begin(), base[i - 1].features.end());
        lagged.push_back(HybridSample::from_features(f, base[i].q));
    }
    HybridOptions opts;
    opts.lag = 1;
    const auto m = fit_hybrid(lagged, FeatureSet::P1P2X, geometry(), FluidProperties::water(),
                              RbfKernel{2.0}, 1e6, opts);
    REQUIRE(m.input_dim() == 6);
    REQUIRE(m.area_model().feature_names().back() == "x_lag1");
    REQUIRE_THROWS_AS(m.predict_flow(base[0].features), InputError);
}

TEST_CASE("noiseless simulator telemetry is fitted to under 1% MAPE", "[hybrid]") {
    SimConfig cfg;
    cfg.dt = 0.05;
    cfg.tau = 2.5;
    cfg.duration = 40.0;
    cfg.x0 = 0.5;
    cfg.cv = Profile::sine(0.5, 0.4, 15.0);
    cfg.p1 = Profile::sine(500.0, 30.0, 23.0);
    const auto rec = run(cfg);
    std::vector<HybridSample> data;
    for (const auto& r : rec) data.push_back(HybridSample::from_features({r.p1Sensed, r.p2Sensed, r.xSensed}, r.qSensed));
    HybridOptions opts;
    opts.auto_sigma = true;
    const auto m = fit_hybrid(data, FeatureSet::P1P2X, cfg.geom, cfg.fluid, RbfKernel{}, 1e6, opts);
    REQUIRE(training_mape(m, data) < 1.0);
}
