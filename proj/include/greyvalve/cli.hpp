#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "greyvalve/hybrid.hpp"
#include "greyvalve/lssvm.hpp"

namespace greyvalve::cli {

// Process exit codes, stable for scripting.
enum ExitCode : int { kOk = 0, kInternalError = 1, kInputError = 2, kIoError = 3 };

enum class Mode { Hybrid, Direct };
enum class Channels { Sensed, True };

struct TrainOptions {
    std::filesystem::path data;
    std::filesystem::path model_out;
    std::optional<std::filesystem::path> plant_config;  // geometry / fluid / density_law
    FeatureSet features = FeatureSet::P1P2X;
    Mode mode = Mode::Hybrid;
    Channels channels = Channels::Sensed;
    std::string kernel = "rbf";
    std::optional<double> sigma;  // median heuristic when absent
    int degree = 2;
    double offset = 1.0;
    double C = 1e4;
    bool grid_search = false;
    std::uint64_t seed = 0;
    bool skip_zero_targets = false;
    bool report = true;
    std::size_t lagged = 0;
};

struct EvaluateOptions {
    std::filesystem::path truth;
    std::optional<std::filesystem::path> pred;  // q_pred taken from here when given
    std::string truth_column = "q";
    std::string pred_column = "q_pred";
    bool skip_zero_targets = false;
};

// Each command throws greyvalve errors; run() maps them to exit codes.
void cmd_simulate(const std::filesystem::path& config, const std::filesystem::path& out,
                  std::optional<std::uint64_t> seed, std::ostream& log);
void cmd_train(const TrainOptions& opts, std::ostream& log);
void cmd_predict(const std::filesystem::path& model, const std::filesystem::path& data,
                 const std::filesystem::path& out, std::ostream& log);
void cmd_evaluate(const EvaluateOptions& opts, std::ostream& log);
void cmd_faults(std::ostream& log);

// Full command line, args[0] being the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace greyvalve::cli
