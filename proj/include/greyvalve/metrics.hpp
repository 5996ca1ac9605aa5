#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>

namespace greyvalve {

// Flow-prediction quality. Percentages are in percent, rmse in target units.
struct EvaluationReport {
    std::size_t n = 0;
    double rmse = 0.0;
    double mape = 0.0;
    double errMax = 0.0;
};

// Throws InputError on length mismatch or empty input, ZeroTargetError
// (carrying the index) when any y_i == 0.
EvaluationReport evaluate(std::span<const double> y, std::span<const double> yhat);

// `n,rmse,mape_pct,errmax_pct`
std::string csv_header();
std::string to_csv_line(const EvaluationReport& r);
void print_table(std::ostream& os, const EvaluationReport& r, const std::string& label = "q");

}  // namespace greyvalve
