#include "greyvalve/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "greyvalve/error.hpp"

namespace greyvalve {

std::size_t arity(FeatureSet fs) { return fs == FeatureSet::P1P2X ? 3 : 4; }

std::vector<std::string> feature_names(FeatureSet fs) {
    if (fs == FeatureSet::P1P2X) return {"p1", "p2", "x"};
    return {"p1", "p2", "x", "temp"};
}

std::string_view to_string(FeatureSet fs) { return fs == FeatureSet::P1P2X ? "p1p2x" : "p1p2xt"; }

FeatureSet parse_feature_set(std::string_view name) {
    if (name == "p1p2x") return FeatureSet::P1P2X;
    if (name == "p1p2xt") return FeatureSet::P1P2XT;
    throw InputError("unknown feature set '" + std::string(name) + "' (expected p1p2x or p1p2xt)");
}

double DensityLaw::density(double T) const { return rho_ref * (1.0 - alpha_T * (T - T_ref)); }

void DensityLaw::validate() const {
    if (!(rho_ref > 0.0) || !std::isfinite(rho_ref)) throw InputError("density_law.rho_ref must be > 0");
    if (!std::isfinite(alpha_T)) throw InputError("density_law.alpha_t must be finite");
    if (!(T_ref > 0.0) || !std::isfinite(T_ref)) throw InputError("density_law.t_ref must be > 0");
}

HybridSample HybridSample::from_features(std::vector<double> features, double q) {
    HybridSample s;
    s.pvc = features.size() > 1 ? features[1] : 0.0;
    s.features = std::move(features);
    s.q = q;
    return s;
}

double area_target(const HybridSample& sample, const ValveGeometry& geom, double rho1) {
    if (sample.features.empty()) throw InputError("area_target: sample has no features");
    const double p1 = sample.features[0];
    if (!(sample.q >= 0.0)) throw InputError("area_target: measured flow must be >= 0");
    if (!(rho1 > 0.0)) throw DomainError("area_target: density must be > 0");
    if (p1 < sample.pvc) throw InconsistentSampleError({0}, "area_target: P1 below pvc");
    if (p1 == sample.pvc) {
        if (sample.q == 0.0) return 0.0;
        throw InconsistentSampleError({0}, "area_target: positive flow with zero pressure drop");
    }
    const double beta2 = geom.beta * geom.beta;
    return sample.q * std::sqrt(1.0 - beta2 * beta2) /
           (geom.Cv * geom.epsilon * std::sqrt(2.0 * (p1 - sample.pvc) * 1000.0 / rho1));
}

double area_target(const HybridSample& sample, const ValveGeometry& geom,
                   const FluidProperties& fluid) {
    return area_target(sample, geom, fluid.rho1);
}

double mechanism_density(FeatureSet fs, const DensityLaw& law, const FluidProperties& fluid,
                         std::span<const double> features) {
    if (fs == FeatureSet::P1P2XT && law.enabled) {
        const double rho = law.density(features[3]);
        if (!(rho > 0.0)) throw DomainError("density law produced a non-positive density");
        return rho;
    }
    return fluid.rho1;
}

HybridValveModel::HybridValveModel(ValveGeometry geom, FluidProperties fluid, DensityLaw density,
                                   FeatureSet fs, std::size_t lag, TrainedLssvm area_model)
    : geom_(geom),
      fluid_(fluid),
      density_(density),
      fs_(fs),
      lag_(lag),
      area_(std::move(area_model)) {
    geom_.validate();
    fluid_.validate();
    density_.validate();
    if (area_.input_dim() != input_dim()) {
        throw InputError("hybrid model: area model takes " + std::to_string(area_.input_dim()) +
                         " inputs but feature set " + std::string(to_string(fs_)) + " with lag " +
                         std::to_string(lag_) + " needs " + std::to_string(input_dim()));
    }
}

double HybridValveModel::mechanism_density(std::span<const double> features) const {
    return greyvalve::mechanism_density(fs_, density_, fluid_, features);
}

double HybridValveModel::predict_area(std::span<const double> features) const {
    if (features.size() != input_dim()) {
        throw InputError("predict_flow: expected " + std::to_string(input_dim()) +
                         " features, got " + std::to_string(features.size()));
    }
    return std::max(0.0, area_.predict(features));
}

double HybridValveModel::predict_flow(std::span<const double> features) const {
    ValveGeometry g = geom_;
    g.Ac = predict_area(features);
    return orifice_flow(g, features[0], features[1], mechanism_density(features));
}

double predict_flow(const HybridValveModel& model, std::span<const double> features) {
    return model.predict_flow(features);
}

HybridValveModel fit_hybrid(std::span<const HybridSample> data, FeatureSet fs,
                            const ValveGeometry& geom, const FluidProperties& fluid,
                            const KernelSpec& kernel, double C, const HybridOptions& opts) {
    geom.validate();
    fluid.validate();
    opts.density.validate();
    if (data.size() < 2) throw InputError("fit_hybrid: need at least 2 samples");

    const std::size_t dim = arity(fs) * (opts.lag + 1);
    Dataset ds;
    ds.X.resize(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(dim));
    ds.Y.resize(static_cast<Eigen::Index>(data.size()));

    std::vector<std::size_t> bad;
    std::ostringstream why;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& s = data[i];
        const auto row = static_cast<Eigen::Index>(i);
        try {
            if (s.features.size() != dim) {
                throw InputError("expected " + std::to_string(dim) + " features, got " +
                                 std::to_string(s.features.size()));
            }
            for (double v : s.features) {
                if (!std::isfinite(v)) throw InputError("non-finite feature");
            }
            if (!std::isfinite(s.q)) throw InputError("non-finite flow");
            const double rho = mechanism_density(fs, opts.density, fluid, s.features);
            ds.Y[row] = area_target(s, geom, rho);
            for (std::size_t j = 0; j < dim; ++j) ds.X(row, static_cast<Eigen::Index>(j)) = s.features[j];
        } catch (const Error& e) {
            if (bad.size() < 10) why << (bad.empty() ? "" : "; ") << "sample " << i << ": " << e.what();
            bad.push_back(i);
        }
    }
    if (!bad.empty()) {
        throw InconsistentSampleError(bad, "fit_hybrid: " + std::to_string(bad.size()) +
                                               " inconsistent sample(s): " + why.str());
    }

    auto names = feature_names(fs);
    for (std::size_t k = 1; k <= opts.lag; ++k) {
        for (const auto& n : feature_names(fs)) names.push_back(n + "_lag" + std::to_string(k));
    }
    ds.feature_names = std::move(names);
    if (opts.normalize) ds = ds.normalized();

    KernelSpec k = kernel;
    if (opts.auto_sigma && std::holds_alternative<RbfKernel>(k)) k = median_heuristic_rbf(ds);

    return HybridValveModel(geom, fluid, opts.density, fs, opts.lag, train(ds, k, C));
}

}  // namespace greyvalve
