#include "greyvalve/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "greyvalve/error.hpp"

namespace greyvalve {

EvaluationReport evaluate(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size()) {
        throw InputError("evaluate: " + std::to_string(y.size()) + " targets but " +
                         std::to_string(yhat.size()) + " predictions");
    }
    if (y.empty()) throw InputError("evaluate: need at least one sample");

    double sq = 0.0;
    double pct_sum = 0.0;
    double pct_max = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 0.0) throw ZeroTargetError(i);
        const double e = y[i] - yhat[i];
        sq += e * e;
        const double pct = std::abs(e) / std::abs(y[i]);
        pct_sum += pct;
        pct_max = std::max(pct_max, pct);
    }
    const auto n = static_cast<double>(y.size());
    EvaluationReport r;
    r.n = y.size();
    r.rmse = std::sqrt(sq / n);
    r.mape = pct_sum / n * 100.0;
    r.errMax = pct_max * 100.0;
    // The mean of a set never exceeds its max; rounding in the sum can.
    r.mape = std::min(r.mape, r.errMax);
    return r;
}

std::string csv_header() { return "n,rmse,mape_pct,errmax_pct"; }

std::string to_csv_line(const EvaluationReport& r) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g", r.n, r.rmse, r.mape, r.errMax);
    return buf;
}

void print_table(std::ostream& os, const EvaluationReport& r, const std::string& label) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-12s %8s %16s %12s %14s\n", "target", "n", "RMSE", "MAPE / %",
                  "Err_max / %");
    os << buf;
    std::snprintf(buf, sizeof buf, "%-12s %8zu %16.6g %12.6g %14.6g\n", label.c_str(), r.n, r.rmse,
                  r.mape, r.errMax);
    os << buf;
}

}  // namespace greyvalve
