#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <sstream>

#include "greyvalve/error.hpp"
#include "greyvalve/metrics.hpp"

using namespace greyvalve;

TEST_CASE("metric examples", "[metrics]") {
    const std::vector<double> y{2.0, 4.0};
    const std::vector<double> yhat{1.0, 5.0};
    const auto r = evaluate(y, yhat);
    REQUIRE(r.n == 2);
    REQUIRE(r.rmse == Catch::Approx(1.0).epsilon(1e-15));
    REQUIRE(r.mape == Catch::Approx(37.5).epsilon(1e-15));
    REQUIRE(r.errMax == Catch::Approx(50.0).epsilon(1e-15));

    const auto perfect = evaluate(std::vector<double>{1.0, -3.0}, std::vector<double>{1.0, -3.0});
    REQUIRE(perfect.rmse == 0.0);
    REQUIRE(perfect.mape == 0.0);
    REQUIRE(perfect.errMax == 0.0);

    const auto single = evaluate(std::vector<double>{-2.0}, std::vector<double>{-1.0});
    REQUIRE(single.rmse == 1.0);
    REQUIRE(single.mape == 50.0);
    REQUIRE(single.errMax == 50.0);
}

TEST_CASE("metric errors", "[metrics]") {
    try {
        evaluate(std::vector<double>{1.0, 0.0, 2.0}, std::vector<double>{1.0, 1.0, 2.0});
        FAIL("expected ZeroTargetError");
    } catch (const ZeroTargetError& e) {
        REQUIRE(e.index() == 1);
    }
    REQUIRE_THROWS_AS(evaluate(std::vector<double>{}, std::vector<double>{}), InputError);
    REQUIRE_THROWS_AS(evaluate(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}), InputError);
}

TEST_CASE("metric properties", "[metrics][property]") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    std::normal_distribution<double> n(0.0, 0.3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t len = 1 + static_cast<std::size_t>(trial % 37);
        std::vector<double> y(len), yhat(len);
        for (std::size_t i = 0; i < len; ++i) {
            y[i] = (trial % 2 ? -1.0 : 1.0) * u(rng);
            yhat[i] = y[i] * (1.0 + n(rng));
        }
        const auto r = evaluate(y, yhat);
        REQUIRE(r.rmse >= 0.0);
        REQUIRE(r.mape >= 0.0);
        REQUIRE(r.mape <= r.errMax);

        // rmse scales with the data, the percentages do not
        const double s = 3.7;
        std::vector<double> ys(y), yhats(yhat);
        for (auto& v : ys) v *= s;
        for (auto& v : yhats) v *= s;
        const auto rs = evaluate(ys, yhats);
        REQUIRE(rs.rmse == Catch::Approx(s * r.rmse).epsilon(1e-12));
        REQUIRE(rs.mape == Catch::Approx(r.mape).epsilon(1e-12).margin(1e-12));
        REQUIRE(rs.errMax == Catch::Approx(r.errMax).epsilon(1e-12).margin(1e-12));

        std::vector<std::size_t> idx(len);
        for (std::size_t i = 0; i < len; ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), rng);
        std::vector<double> yp(len), yhatp(len);
        for (std::size_t i = 0; i < len; ++i) {
            yp[i] = y[idx[i]];
            yhatp[i] = yhat[idx[i]];
        }
        const auto rp = evaluate(yp, yhatp);
        REQUIRE(rp.rmse == Catch::Approx(r.rmse).epsilon(1e-12).margin(1e-15));
        REQUIRE(rp.mape == Catch::Approx(r.mape).epsilon(1e-12).margin(1e-12));
        REQUIRE(rp.errMax == r.errMax);
    }
}

TEST_CASE("metric formatting", "[metrics]") {
    REQUIRE(csv_header() == "n,rmse,mape_pct,errmax_pct");
    const auto r = evaluate(std::vector<double>{2.0, 4.0}, std::vector<double>{1.0, 5.0});
    REQUIRE(to_csv_line(r) == "2,1,37.5,50");
    std::ostringstream os;
    print_table(os, r);
    REQUIRE(os.str().find("37.5") != std::string::npos);
}
