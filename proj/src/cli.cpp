#include "greyvalve/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "greyvalve/config_io.hpp"
#include "greyvalve/csv.hpp"
#include "greyvalve/error.hpp"
#include "greyvalve/metrics.hpp"
#include "greyvalve/model_io.hpp"
#include "greyvalve/simulator.hpp"

namespace greyvalve::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_input_file(const fs::path& p) {
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) throw IoError("input file '" + p.string() + "' does not exist");
}

void require_output_dir(const fs::path& p) {
    const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
        throw IoError("output directory '" + dir.string() + "' does not exist");
    }
}

// Sensed channels fall back to the true column when a file has no
// *_sensed column (hand-made tables with only p1, p2, x, q).
std::string channel_column(const CsvTable& t, const std::string& base, Channels ch) {
    if (ch == Channels::Sensed && base != "temp") {
        const std::string sensed = base + "_sensed";
        if (t.column(sensed) >= 0) return sensed;
    }
    return base;
}

std::vector<std::string> input_columns(const CsvTable& t, FeatureSet fs, Channels ch) {
    std::vector<std::string> cols;
    for (const auto& name : feature_names(fs)) cols.push_back(channel_column(t, name, ch));
    return cols;
}

struct FeatureRows {
    std::vector<std::vector<double>> features;
    std::vector<std::size_t> source_row;  // index into the CSV rows
};

// Current block first, then `lag` earlier blocks; the first `lag` rows have
// no complete history and are skipped.
FeatureRows build_features(const CsvTable& t, const std::vector<std::string>& cols, std::size_t lag) {
    std::vector<std::size_t> idx;
    for (const auto& c : cols) idx.push_back(t.require_column(c));
    FeatureRows out;
    for (std::size_t r = lag; r < t.rows.size(); ++r) {
        std::vector<double> f;
        f.reserve(idx.size() * (lag + 1));
        for (std::size_t k = 0; k <= lag; ++k) {
            for (std::size_t c : idx) {
                const double v = t.number(r - k, c);
                if (!std::isfinite(v)) {
                    throw InputError("row " + std::to_string(r - k + 1) + ", column '" + t.header[c] +
                                     "': non-finite value");
                }
                f.push_back(v);
            }
        }
        out.features.push_back(std::move(f));
        out.source_row.push_back(r);
    }
    return out;
}

KernelSpec make_kernel(const TrainOptions& o) {
    if (o.kernel == "rbf") return RbfKernel{o.sigma.value_or(1.0)};
    if (o.kernel == "linear") return LinearKernel{};
    if (o.kernel == "poly") return PolynomialKernel{o.degree, o.offset};
    throw InputError("--kernel: unknown kernel '" + o.kernel + "'");
}

EvaluationReport report_on(std::span<const double> y, std::span<const double> yhat, bool skip_zero) {
    if (!skip_zero) {
        try {
            return evaluate(y, yhat);
        } catch (const ZeroTargetError& e) {
            throw InputError(std::string(e.what()) +
                             "; percentage metrics are undefined for zero targets, pass "
                             "--skip-zero-targets to exclude those rows");
        }
    }
    std::vector<double> a, b;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0.0) {
            a.push_back(y[i]);
            b.push_back(yhat[i]);
        }
    }
    if (a.empty()) throw InputError("no rows left after skipping zero targets");
    return evaluate(a, b);
}

std::string mode_name(Mode m) { return m == Mode::Hybrid ? "hybrid" : "direct"; }

}  // namespace

// ---------------------------------------------------------------------------

void cmd_simulate(const fs::path& config, const fs::path& out, std::optional<std::uint64_t> seed,
                  std::ostream& log) {
    require_input_file(config);
    require_output_dir(out);
    SimConfig cfg = load_sim_config(config);
    if (seed) cfg.seed = *seed;
    const auto records = run(cfg);
    write_file_atomic(out, telemetry_csv(records));
    log << "wrote " << records.size() << " records to " << out.string() << "\n";
}

void cmd_train(const TrainOptions& o, std::ostream& log) {
    require_input_file(o.data);
    if (o.plant_config) require_input_file(*o.plant_config);
    require_output_dir(o.model_out);
    if (!(o.C > 0.0) || !std::isfinite(o.C)) throw InputError("--c must be > 0");
    if (o.sigma && !(*o.sigma > 0.0)) throw InputError("--sigma must be > 0");

    const CsvTable table = read_csv(o.data);
    const auto cols = input_columns(table, o.features, o.channels);
    const std::string target_col = channel_column(table, "q", o.channels);
    const auto rows = build_features(table, cols, o.lagged);
    const std::size_t tcol = table.require_column(target_col);
    if (rows.features.size() < 2) {
        throw InputError("training needs at least 2 usable rows, got " +
                         std::to_string(rows.features.size()));
    }
    std::vector<double> target;
    for (std::size_t r : rows.source_row) target.push_back(table.number(r, tcol));

    SimConfig plant;
    if (o.plant_config) plant = load_sim_config(*o.plant_config);

    KernelSpec kernel = make_kernel(o);
    const bool auto_sigma = std::holds_alternative<RbfKernel>(kernel) && !o.sigma;

    std::optional<FlowModel> model;
    if (o.mode == Mode::Hybrid) {
        std::vector<HybridSample> samples;
        samples.reserve(target.size());
        for (std::size_t i = 0; i < target.size(); ++i) {
            samples.push_back(HybridSample::from_features(rows.features[i], target[i]));
        }
        HybridOptions ho;
        ho.density = plant.density;
        ho.lag = o.lagged;
        ho.auto_sigma = auto_sigma;
        double C = o.C;
        if (o.grid_search) {
            // Search on the area targets the hybrid fit will use.
            Dataset ds;
            ds.X.resize(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(cols.size() * (o.lagged + 1)));
            ds.Y.resize(static_cast<Eigen::Index>(samples.size()));
            for (std::size_t i = 0; i < samples.size(); ++i) {
                const double rho = mechanism_density(o.features, plant.density, plant.fluid, samples[i].features);
                ds.Y[static_cast<Eigen::Index>(i)] = area_target(samples[i], plant.geom, rho);
                for (std::size_t k = 0; k < samples[i].features.size(); ++k) {
                    ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = samples[i].features[k];
                }
            }
            GridSearchOptions gs;
            gs.seed = o.seed;
            const auto best = grid_search(ds.normalized(), kernel, gs);
            kernel = best.kernel;
            C = best.C;
            ho.auto_sigma = false;
            log << "grid search: C = " << C << ", cv mse = " << best.cv_mse << "\n";
        }
        model = fit_hybrid(samples, o.features, plant.geom, plant.fluid, kernel, C, ho);
    } else {
        Dataset ds;
        ds.X.resize(static_cast<Eigen::Index>(target.size()), static_cast<Eigen::Index>(cols.size() * (o.lagged + 1)));
        ds.Y = Eigen::Map<const Eigen::VectorXd>(target.data(), static_cast<Eigen::Index>(target.size()));
        for (std::size_t i = 0; i < target.size(); ++i) {
            for (std::size_t k = 0; k < rows.features[i].size(); ++k) {
                ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows.features[i][k];
            }
        }
        ds = ds.normalized();
        double C = o.C;
        if (o.grid_search) {
            GridSearchOptions gs;
            gs.seed = o.seed;
            const auto best = grid_search(ds, kernel, gs);
            kernel = best.kernel;
            C = best.C;
            log << "grid search: C = " << C << ", cv mse = " << best.cv_mse << "\n";
        } else if (auto_sigma) {
            kernel = median_heuristic_rbf(ds);
        }
        model = DirectModel{o.features, o.lagged, train(ds, kernel, C)};
    }

    std::optional<EvaluationReport> report;
    if (o.report) {
        std::vector<double> pred;
        pred.reserve(target.size());
        for (const auto& f : rows.features) pred.push_back(predict_flow(*model, f));
        report = report_on(target, pred, o.skip_zero_targets);
    }

    json doc = to_json(*model);
    doc["input_columns"] = cols;
    doc["target_column"] = target_col;
    write_file_atomic(o.model_out, doc.dump(2) + "\n");

    log << "trained " << mode_name(o.mode) << " model (" << to_string(o.features) << ", "
        << rows.features.size() << " samples) -> " << o.model_out.string() << "\n";
    if (report) {
        log << "training-set evaluation:\n";
        print_table(log, *report, target_col);
        log << csv_header() << "\n" << to_csv_line(*report) << "\n";
    }
}

void cmd_predict(const fs::path& model_path, const fs::path& data, const fs::path& out,
                 std::ostream& log) {
    require_input_file(model_path);
    require_input_file(data);
    require_output_dir(out);

    const json doc = load_json(model_path);
    const FlowModel model = flow_model_from_json(doc);
    const FeatureSet fs = feature_set_of(model);
    const std::size_t lag = lag_of(model);

    CsvTable table = read_csv(data);
    std::vector<std::string> cols;
    if (doc.contains("input_columns")) {
        try {
            cols = doc.at("input_columns").get<std::vector<std::string>>();
        } catch (const json::exception& e) {
            throw InputError(std::string("model document: input_columns: ") + e.what());
        }
        if (cols.size() != arity(fs)) throw InputError("model document: input_columns does not match feature_set");
    } else {
        cols = input_columns(table, fs, Channels::Sensed);
    }
    const auto rows = build_features(table, cols, lag);

    CsvTable result;
    result.header = table.header;
    result.header.push_back("q_pred");
    for (std::size_t i = 0; i < rows.features.size(); ++i) {
        auto row = table.rows[rows.source_row[i]];
        row.push_back(format_double(predict_flow(model, rows.features[i])));
        result.rows.push_back(std::move(row));
    }
    std::ostringstream os;
    write_csv(os, result);
    write_file_atomic(out, os.str());
    log << "wrote " << result.rows.size() << " predictions to " << out.string() << "\n";
}

void cmd_evaluate(const EvaluateOptions& o, std::ostream& log) {
    require_input_file(o.truth);
    if (o.pred) require_input_file(*o.pred);
    const CsvTable truth = read_csv(o.truth);
    const std::vector<double> y = truth.numeric_column(o.truth_column);
    std::vector<double> yhat;
    if (o.pred) {
        const CsvTable pred = read_csv(*o.pred);
        if (pred.rows.size() != truth.rows.size()) {
            throw InputError("row count mismatch: " + o.truth.string() + " has " +
                             std::to_string(truth.rows.size()) + " rows, " + o.pred->string() +
                             " has " + std::to_string(pred.rows.size()));
        }
        yhat = pred.numeric_column(o.pred_column);
    } else {
        yhat = truth.numeric_column(o.pred_column);
    }
    const EvaluationReport r = report_on(y, yhat, o.skip_zero_targets);
    print_table(log, r, "Flow");
    log << csv_header() << "\n" << to_csv_line(r) << "\n";
}

void cmd_faults(std::ostream& log) {
    log << "id   description  direction  type\n";
    for (const auto& e : fault_catalog()) {
        log << fault_label(e.id) << "  " << e.description << "  " << direction_label(e) << "  "
            << to_string(e.type) << "\n";
    }
}

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Grey-box control valve modeling: simulate, train, predict, evaluate"};
    app.require_subcommand(1);

    std::string sim_config, sim_out;
    std::optional<std::uint64_t> sim_seed;
    auto* sim = app.add_subcommand("simulate", "Generate telemetry CSV from a simulation config");
    sim->add_option("config", sim_config, "Simulation config (JSON)")->required();
    sim->add_option("out", sim_out, "Output telemetry CSV")->required();
    sim->add_option("--seed", sim_seed, "Override the config seed");

    TrainOptions topt;
    std::string t_data, t_out, t_plant, t_features = "p1p2x", t_mode = "hybrid", t_channels = "sensed";
    auto* tr = app.add_subcommand("train", "Fit a hybrid or direct LSSVM flow model");
    tr->add_option("data", t_data, "Training CSV")->required();
    tr->add_option("-o,--model-out", t_out, "Model JSON to write")->required();
    tr->add_option("--features", t_features, "Feature set")->check(CLI::IsMember({"p1p2x", "p1p2xt"}));
    tr->add_option("--mode", t_mode, "hybrid (learn flow area) or direct (learn flow)")
        ->check(CLI::IsMember({"hybrid", "direct"}));
    tr->add_option("--kernel", topt.kernel, "Kernel")->check(CLI::IsMember({"rbf", "linear", "poly"}));
    auto* sigma_opt = tr->add_option("--sigma", topt.sigma, "Rbf bandwidth (default: median heuristic)");
    tr->add_option("--degree", topt.degree, "Polynomial degree");
    tr->add_option("--offset", topt.offset, "Polynomial offset");
    auto* c_opt = tr->add_option("--c", topt.C, "Regularization constant C");
    tr->add_option("--config", t_plant, "Plant config (geometry, fluid, density_law) in simulate format");
    tr->add_option("--channels", t_channels, "Use sensed or true telemetry channels")
        ->check(CLI::IsMember({"sensed", "true"}));
    tr->add_option("--lagged", topt.lagged, "Append k previous samples of the features");
    tr->add_option("--seed", topt.seed, "Seed for grid-search folds");
    tr->add_flag("--grid-search", topt.grid_search, "5-fold grid search over C (and sigma)")
        ->excludes(c_opt)
        ->excludes(sigma_opt);
    tr->add_flag("--skip-zero-targets", topt.skip_zero_targets, "Leave zero-flow rows out of the report");
    bool no_report = false;
    tr->add_flag("--no-report", no_report, "Skip the training-set evaluation");

    std::string p_model, p_data, p_out;
    auto* pr = app.add_subcommand("predict", "Append q_pred to a telemetry CSV");
    pr->add_option("model", p_model, "Model JSON")->required();
    pr->add_option("data", p_data, "Input CSV")->required();
    pr->add_option("-o,--out", p_out, "Output CSV")->required();

    EvaluateOptions eopt;
    std::string e_truth, e_pred;
    auto* ev = app.add_subcommand("evaluate", "RMSE / MAPE / Err_max of q_pred against q");
    ev->add_option("truth", e_truth, "CSV with the q column (and q_pred when no second file)")->required();
    ev->add_option("pred", e_pred, "Optional CSV with q_pred");
    ev->add_option("--truth-column", eopt.truth_column, "Truth column");
    ev->add_option("--pred-column", eopt.pred_column, "Prediction column");
    ev->add_flag("--skip-zero-targets", eopt.skip_zero_targets, "Drop rows whose target is zero");

    auto* fl = app.add_subcommand("faults", "List the actuator fault catalog");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return kOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kInputError;
    }

    try {
        if (*sim) {
            cmd_simulate(sim_config, sim_out, sim_seed, out);
        } else if (*tr) {
            topt.data = t_data;
            topt.model_out = t_out;
            if (!t_plant.empty()) topt.plant_config = t_plant;
            topt.features = parse_feature_set(t_features);
            topt.mode = t_mode == "direct" ? Mode::Direct : Mode::Hybrid;
            topt.channels = t_channels == "true" ? Channels::True : Channels::Sensed;
            topt.report = !no_report;
            cmd_train(topt, out);
        } else if (*pr) {
            cmd_predict(p_model, p_data, p_out, out);
        } else if (*ev) {
            eopt.truth = e_truth;
            if (!e_pred.empty()) eopt.pred = e_pred;
            cmd_evaluate(eopt, out);
        } else if (*fl) {
            cmd_faults(out);
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternalError;
    }
    return kOk;
}

}  // namespace greyvalve::cli
