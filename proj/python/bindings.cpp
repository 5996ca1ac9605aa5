#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "greyvalve/config_io.hpp"
#include "greyvalve/error.hpp"
#include "greyvalve/hybrid.hpp"
#include "greyvalve/lssvm.hpp"
#include "greyvalve/mechanism.hpp"
#include "greyvalve/metrics.hpp"
#include "greyvalve/model_io.hpp"
#include "greyvalve/simulator.hpp"

namespace py = pybind11;
using namespace greyvalve;

namespace {

std::span<const double> as_span(const std::vector<double>& v) { return {v.data(), v.size()}; }

TrainedLssvm train_py(const RowMatrix& X, const Eigen::VectorXd& Y, const KernelSpec& kernel,
                      double C, bool normalize) {
    Dataset d;
    d.X = X;
    d.Y = Y;
    if (normalize) d.norm = Normalization::fit(X);
    return train(d, kernel, C);
}

HybridValveModel fit_hybrid_py(const RowMatrix& features, const Eigen::VectorXd& q,
                               const std::string& feature_set, const ValveGeometry& geom,
                               const FluidProperties& fluid, const KernelSpec& kernel, double C,
                               const DensityLaw& density, bool auto_sigma) {
    if (features.rows() != q.size()) throw InputError("features and q have different lengths");
    std::vector<HybridSample> samples;
    samples.reserve(static_cast<std::size_t>(q.size()));
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        std::vector<double> f(features.row(i).data(), features.row(i).data() + features.cols());
        samples.push_back(HybridSample::from_features(std::move(f), q(i)));
    }
    HybridOptions opts;
    opts.density = density;
    opts.auto_sigma = auto_sigma;
    return fit_hybrid(samples, parse_feature_set(feature_set), geom, fluid, kernel, C, opts);
}

Eigen::VectorXd predict_rows(const HybridValveModel& m, const RowMatrix& X) {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        out(i) = m.predict_flow(std::span<const double>(X.row(i).data(), static_cast<std::size_t>(X.cols())));
    }
    return out;
}

// Column-oriented telemetry: {name: list}.
py::dict telemetry_columns(const std::vector<TelemetryRecord>& rec) {
    const std::size_t n = rec.size();
    std::vector<double> t(n), cv(n), x(n), xs(n), p1(n), p1s(n), p2(n), p2s(n), temp(n), q(n), qs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = rec[i];
        t[i] = r.t, cv[i] = r.cv, x[i] = r.x, xs[i] = r.xSensed, p1[i] = r.p1, p1s[i] = r.p1Sensed;
        p2[i] = r.p2, p2s[i] = r.p2Sensed, temp[i] = r.temp, q[i] = r.q, qs[i] = r.qSensed;
    }
    py::dict d;
    d["t"] = t, d["cv"] = cv, d["x"] = x, d["x_sensed"] = xs, d["p1"] = p1, d["p1_sensed"] = p1s;
    d["p2"] = p2, d["p2_sensed"] = p2s, d["temp"] = temp, d["q"] = q, d["q_sensed"] = qs;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Grey-box control valve modelling: mechanism, LSSVM, hybrid model, simulator";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InputError>(m, "InputError", error.ptr());
    py::register_exception<DomainError>(m, "DomainError", error.ptr());
    py::register_exception<NotApplicableError>(m, "NotApplicableError", error.ptr());
    py::register_exception<ConditioningError>(m, "ConditioningError", error.ptr());
    py::register_exception<ZeroTargetError>(m, "ZeroTargetError", error.ptr());
    py::register_exception<InconsistentSampleError>(m, "InconsistentSampleError", error.ptr());
    py::register_exception<SimulationError>(m, "SimulationError", error.ptr());
    py::register_exception<IoError>(m, "IoError", error.ptr());

    // mechanism
    py::class_<FluidProperties>(m, "FluidProperties")
        .def(py::init<>())
        .def_readwrite("rho1", &FluidProperties::rho1)
        .def_readwrite("rho0", &FluidProperties::rho0)
        .def_readwrite("Rs", &FluidProperties::Rs)
        .def_readwrite("dHvap", &FluidProperties::dHvap)
        .def_readwrite("pCrit", &FluidProperties::pCrit)
        .def_readwrite("vaporRefT", &FluidProperties::vaporRefT)
        .def_readwrite("vaporRefP", &FluidProperties::vaporRefP)
        .def_static("water", &FluidProperties::water)
        .def_static("water_rs287", &FluidProperties::water_rs287);

    py::class_<ValveGeometry>(m, "ValveGeometry")
        .def(py::init([](double Ac, double beta, double Cv, double epsilon, double FL) {
                 return ValveGeometry{Ac, beta, Cv, epsilon, FL};
             }),
             py::arg("Ac") = 0.0, py::arg("beta") = 0.0, py::arg("Cv") = 1.0, py::arg("epsilon") = 1.0,
             py::arg("FL") = 0.9)
        .def_readwrite("Ac", &ValveGeometry::Ac)
        .def_readwrite("beta", &ValveGeometry::beta)
        .def_readwrite("Cv", &ValveGeometry::Cv)
        .def_readwrite("epsilon", &ValveGeometry::epsilon)
        .def_readwrite("FL", &ValveGeometry::FL);

    py::enum_<FlowRegime>(m, "FlowRegime")
        .value("NonChokedTurbulent", FlowRegime::NonChokedTurbulent)
        .value("Laminar", FlowRegime::Laminar)
        .value("ChokedCavitation", FlowRegime::ChokedCavitation)
        .value("ChokedFlashing", FlowRegime::ChokedFlashing);

    m.def("vapor_pressure", &vapor_pressure, py::arg("fluid"), py::arg("T"));
    m.def("critical_pressure_ratio", &critical_pressure_ratio, py::arg("pv"), py::arg("pCrit"));
    m.def("choked_pressure_drop", &choked_pressure_drop, py::arg("geom"), py::arg("p1"), py::arg("pv"),
          py::arg("pCrit"));
    m.def("orifice_flow", &orifice_flow, py::arg("geom"), py::arg("p1"), py::arg("pvc"), py::arg("rho1"));
    m.def(
        "classify_regime",
        [](double p1, double p2, double T, double ReV, const ValveGeometry& g, const FluidProperties& f) {
            return classify_regime(OperatingPoint{p1, p2, T, std::nullopt, ReV}, g, f);
        },
        py::arg("p1"), py::arg("p2"), py::arg("T"), py::arg("ReV"), py::arg("geom"), py::arg("fluid"));
    m.def(
        "flow_coefficient",
        [](double p1, double p2, double qv, const FluidProperties& f, FlowRegime r, double N1, double FR) {
            return flow_coefficient(OperatingPoint{p1, p2, 293.15, qv, std::nullopt}, f, r, N1, FR);
        },
        py::arg("p1"), py::arg("p2"), py::arg("qv"), py::arg("fluid"), py::arg("regime"),
        py::arg("N1") = kDefaultN1, py::arg("FR") = 1.0);

    // lssvm
    py::class_<RbfKernel>(m, "RbfKernel")
        .def(py::init([](double s) { return RbfKernel{s}; }), py::arg("sigma") = 1.0)
        .def_readwrite("sigma", &RbfKernel::sigma);
    py::class_<LinearKernel>(m, "LinearKernel").def(py::init<>());
    py::class_<PolynomialKernel>(m, "PolynomialKernel")
        .def(py::init([](int d, double o) { return PolynomialKernel{d, o}; }), py::arg("degree") = 2,
             py::arg("offset") = 1.0)
        .def_readwrite("degree", &PolynomialKernel::degree)
        .def_readwrite("offset", &PolynomialKernel::offset);

    py::class_<TrainedLssvm>(m, "TrainedLssvm")
        .def_property_readonly("alpha", &TrainedLssvm::alpha)
        .def_property_readonly("b", &TrainedLssvm::b)
        .def_property_readonly("C", &TrainedLssvm::C)
        .def_property_readonly("size", &TrainedLssvm::size)
        .def("predict", py::overload_cast<const RowMatrix&>(&TrainedLssvm::predict, py::const_), py::arg("X"));

    m.def("train", &train_py, py::arg("X"), py::arg("Y"), py::arg("kernel"), py::arg("C"),
          py::arg("normalize") = false, "Fit an LSSVM regressor; X is (l, n), Y is (l,).");

    // hybrid
    py::class_<DensityLaw>(m, "DensityLaw")
        .def(py::init<>())
        .def_readwrite("enabled", &DensityLaw::enabled)
        .def_readwrite("rho_ref", &DensityLaw::rho_ref)
        .def_readwrite("alpha_T", &DensityLaw::alpha_T)
        .def_readwrite("T_ref", &DensityLaw::T_ref)
        .def("density", &DensityLaw::density);

    py::class_<HybridValveModel>(m, "HybridValveModel")
        .def_property_readonly("feature_set", [](const HybridValveModel& h) { return std::string(to_string(h.feature_set())); })
        .def_property_readonly("area_model", &HybridValveModel::area_model)
        .def("predict_area", [](const HybridValveModel& h, const std::vector<double>& f) { return h.predict_area(as_span(f)); })
        .def("predict_flow", [](const HybridValveModel& h, const std::vector<double>& f) { return h.predict_flow(as_span(f)); })
        .def("predict", &predict_rows, py::arg("X"), "Flow for every row of X.")
        .def("save", [](const HybridValveModel& h, const std::filesystem::path& p) { save_model(p, FlowModel{h}); });

    m.def("fit_hybrid", &fit_hybrid_py, py::arg("features"), py::arg("q"), py::arg("feature_set") = "p1p2x",
          py::arg("geom") = ValveGeometry{0.0, 0.5, 0.95, 1.0, 0.9}, py::arg("fluid") = FluidProperties{},
          py::arg("kernel") = KernelSpec{RbfKernel{}}, py::arg("C") = 1e4, py::arg("density") = DensityLaw{},
          py::arg("auto_sigma") = true);
    m.def("load_hybrid", [](const std::filesystem::path& p) {
        auto model = load_model(p);
        if (!std::holds_alternative<HybridValveModel>(model)) throw InputError("not a hybrid model");
        return std::get<HybridValveModel>(model);
    });

    // simulator
    m.def(
        "simulate",
        [](const std::filesystem::path& config, std::optional<std::uint64_t> seed) {
            SimConfig cfg = load_sim_config(config);
            if (seed) cfg.seed = *seed;
            return telemetry_columns(run(cfg));
        },
        py::arg("config"), py::arg("seed") = std::nullopt, "Run a JSON config; returns columns as lists.");
    m.def(
        "simulate_json",
        [](const std::string& text) { return telemetry_columns(run(sim_config_from_json(nlohmann::json::parse(text)))); },
        py::arg("text"));
    m.def("fault_catalog", [] {
        py::list out;
        for (const auto& e : fault_catalog()) {
            out.append(py::make_tuple(fault_label(e.id), std::string(e.description), direction_label(e),
                                      std::string(to_string(e.type))));
        }
        return out;
    });

    // metrics
    py::class_<EvaluationReport>(m, "EvaluationReport")
        .def_readonly("n", &EvaluationReport::n)
        .def_readonly("rmse", &EvaluationReport::rmse)
        .def_readonly("mape", &EvaluationReport::mape)
        .def_readonly("errMax", &EvaluationReport::errMax);
    m.def("evaluate", [](const std::vector<double>& y, const std::vector<double>& yhat) {
        return evaluate(as_span(y), as_span(yhat));
    }, py::arg("y"), py::arg("yhat"));
}
