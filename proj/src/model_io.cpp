#include "greyvalve/model_io.hpp"

#include <fstream>
#include <sstream>

#include "greyvalve/csv.hpp"
#include "greyvalve/error.hpp"

namespace greyvalve {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw InputError(std::string("model document: missing field '") + key + "'");
    }
    return j.at(key);
}

double number(const json& j, const char* key) {
    const json& v = field(j, key);
    if (!v.is_number()) throw InputError(std::string("model document: '") + key + "' must be a number");
    return v.get<double>();
}

void check_version(const json& j, const char* what) {
    const int v = static_cast<int>(number(j, "format_version"));
    if (v != kModelFormatVersion) {
        throw InputError(std::string(what) + " format_version " + std::to_string(v) +
                         " is not supported (this build reads version " +
                         std::to_string(kModelFormatVersion) + ")");
    }
}

void read_opt(const json& j, const char* key, double& dst) {
    if (j.contains(key)) {
        if (!j.at(key).is_number()) throw InputError(std::string("'") + key + "' must be a number");
        dst = j.at(key).get<double>();
    }
}

}  // namespace

double predict_flow(const FlowModel& m, std::span<const double> features) {
    return std::visit([&](const auto& mm) { return mm.predict_flow(features); }, m);
}

FeatureSet feature_set_of(const FlowModel& m) {
    return std::visit(overloaded{[](const HybridValveModel& h) { return h.feature_set(); },
                                 [](const DirectModel& d) { return d.fs; }},
                      m);
}

std::size_t lag_of(const FlowModel& m) {
    return std::visit(overloaded{[](const HybridValveModel& h) { return h.lag(); },
                                 [](const DirectModel& d) { return d.lag; }},
                      m);
}

json to_json(const TrainedLssvm& m) {
    json kernel;
    kernel["type"] = kernel_name(m.kernel());
    std::visit(overloaded{
                   [&](const RbfKernel& r) { kernel["params"] = {{"sigma", r.sigma}}; },
                   [&](const LinearKernel&) { kernel["params"] = json::object(); },
                   [&](const PolynomialKernel& p) {
                       kernel["params"] = {{"degree", p.degree}, {"offset", p.offset}};
                   },
               },
               m.kernel());

    json train_x = json::array();
    for (Eigen::Index i = 0; i < m.train_x().rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.train_x().cols(); ++k) row.push_back(m.train_x()(i, k));
        train_x.push_back(std::move(row));
    }
    json j;
    j["format_version"] = kModelFormatVersion;
    j["kernel"] = kernel;
    j["C"] = m.C();
    j["alpha"] = std::vector<double>(m.alpha().data(), m.alpha().data() + m.alpha().size());
    j["b"] = m.b();
    j["train_x"] = std::move(train_x);
    j["feature_names"] = m.feature_names();
    if (m.norm()) j["norm"] = {{"mean", m.norm()->mean}, {"std", m.norm()->std}};
    else j["norm"] = nullptr;
    return j;
}

TrainedLssvm lssvm_from_json(const json& j) {
    try {
        check_version(j, "lssvm model");
        const json& kj = field(j, "kernel");
        const std::string type = field(kj, "type").get<std::string>();
        const json params = kj.value("params", json::object());
        KernelSpec kernel;
        if (type == "rbf") kernel = RbfKernel{number(params, "sigma")};
        else if (type == "linear") kernel = LinearKernel{};
        else if (type == "poly") {
            kernel = PolynomialKernel{static_cast<int>(number(params, "degree")), number(params, "offset")};
        } else {
            throw InputError("model document: unknown kernel type '" + type + "'");
        }

        const auto alpha_v = field(j, "alpha").get<std::vector<double>>();
        const auto rows = field(j, "train_x").get<std::vector<std::vector<double>>>();
        if (rows.size() != alpha_v.size()) throw InputError("model document: train_x and alpha lengths differ");
        const std::size_t n = rows.empty() ? 0 : rows.front().size();
        RowMatrix X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != n) throw InputError("model document: ragged train_x");
            for (std::size_t k = 0; k < n; ++k) {
                X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
            }
        }
        Eigen::VectorXd alpha = Eigen::Map<const Eigen::VectorXd>(
            alpha_v.data(), static_cast<Eigen::Index>(alpha_v.size()));

        std::optional<Normalization> norm;
        if (j.contains("norm") && !j.at("norm").is_null()) {
            Normalization nz;
            nz.mean = field(j.at("norm"), "mean").get<std::vector<double>>();
            nz.std = field(j.at("norm"), "std").get<std::vector<double>>();
            if (nz.mean.size() != nz.std.size()) throw InputError("model document: norm mean/std lengths differ");
            norm = std::move(nz);
        }
        std::vector<std::string> names;
        if (j.contains("feature_names")) names = j.at("feature_names").get<std::vector<std::string>>();
        return TrainedLssvm(std::move(alpha), number(j, "b"), std::move(X), kernel, number(j, "C"),
                            std::move(norm), std::move(names));
    } catch (const json::exception& e) {
        throw InputError(std::string("model document: ") + e.what());
    }
}

json to_json(const ValveGeometry& g) {
    return {{"cv", g.Cv}, {"epsilon", g.epsilon}, {"beta", g.beta}, {"fl", g.FL}};
}

json to_json(const FluidProperties& f) {
    return {{"rho1", f.rho1},   {"rho0", f.rho0},   {"rs", f.Rs},
            {"dhvap", f.dHvap}, {"pcrit", f.pCrit}, {"vapor_ref_t", f.vaporRefT},
            {"vapor_ref_p", f.vaporRefP}};
}

json to_json(const DensityLaw& d) {
    return {{"enabled", d.enabled}, {"rho_ref", d.rho_ref}, {"alpha_t", d.alpha_T}, {"t_ref", d.T_ref}};
}

ValveGeometry geometry_from_json(const json& j, ValveGeometry g) {
    if (!j.is_object()) throw InputError("geometry must be an object");
    read_opt(j, "cv", g.Cv);
    read_opt(j, "epsilon", g.epsilon);
    read_opt(j, "beta", g.beta);
    read_opt(j, "fl", g.FL);
    return g;
}

FluidProperties fluid_from_json(const json& j, FluidProperties f) {
    if (!j.is_object()) throw InputError("fluid must be an object");
    if (j.contains("preset")) {
        const auto p = j.at("preset").get<std::string>();
        if (p == "water") f = FluidProperties::water();
        else if (p == "water_rs287") f = FluidProperties::water_rs287();
        else throw InputError("fluid.preset: unknown preset '" + p + "'");
    }
    read_opt(j, "rho1", f.rho1);
    read_opt(j, "rho0", f.rho0);
    read_opt(j, "rs", f.Rs);
    read_opt(j, "dhvap", f.dHvap);
    read_opt(j, "pcrit", f.pCrit);
    read_opt(j, "vapor_ref_t", f.vaporRefT);
    read_opt(j, "vapor_ref_p", f.vaporRefP);
    return f;
}

DensityLaw density_law_from_json(const json& j, DensityLaw d) {
    if (!j.is_object()) throw InputError("density_law must be an object");
    if (j.contains("enabled")) d.enabled = j.at("enabled").get<bool>();
    read_opt(j, "rho_ref", d.rho_ref);
    read_opt(j, "alpha_t", d.alpha_T);
    read_opt(j, "t_ref", d.T_ref);
    return d;
}

json to_json(const FlowModel& m) {
    return std::visit(
        overloaded{
            [](const HybridValveModel& h) {
                json j;
                j["format_version"] = kModelFormatVersion;
                j["mode"] = "hybrid";
                j["feature_set"] = std::string(to_string(h.feature_set()));
                j["lagged"] = h.lag();
                j["pvc_convention"] = std::string(kPvcConvention);
                j["geom"] = to_json(h.geometry());
                j["fluid"] = to_json(h.fluid());
                j["density_law"] = to_json(h.density_law());
                j["lssvm"] = to_json(h.area_model());
                return j;
            },
            [](const DirectModel& d) {
                json j;
                j["format_version"] = kModelFormatVersion;
                j["mode"] = "direct";
                j["feature_set"] = std::string(to_string(d.fs));
                j["lagged"] = d.lag;
                j["lssvm"] = to_json(d.model);
                return j;
            },
        },
        m);
}

FlowModel flow_model_from_json(const json& j) {
    try {
        check_version(j, "model");
        const auto mode = field(j, "mode").get<std::string>();
        const FeatureSet fs = parse_feature_set(field(j, "feature_set").get<std::string>());
        const auto lag = static_cast<std::size_t>(j.value("lagged", 0));
        TrainedLssvm lssvm = lssvm_from_json(field(j, "lssvm"));
        if (mode == "direct") {
            if (lssvm.input_dim() != arity(fs) * (lag + 1)) {
                throw InputError("model document: lssvm input dimension does not match feature_set");
            }
            return DirectModel{fs, lag, std::move(lssvm)};
        }
        if (mode != "hybrid") throw InputError("model document: unknown mode '" + mode + "'");
        const auto pvc = j.value("pvc_convention", std::string(kPvcConvention));
        if (pvc != kPvcConvention) {
            throw InputError("model document: unsupported pvc_convention '" + pvc + "'");
        }
        return HybridValveModel(geometry_from_json(field(j, "geom")), fluid_from_json(field(j, "fluid")),
                                density_law_from_json(j.value("density_law", json::object())), fs, lag,
                                std::move(lssvm));
    } catch (const json::exception& e) {
        throw InputError(std::string("model document: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const FlowModel& m) {
    write_file_atomic(path, to_json(m).dump(2) + "\n");
}

FlowModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("model '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return flow_model_from_json(j);
}

}  // namespace greyvalve
