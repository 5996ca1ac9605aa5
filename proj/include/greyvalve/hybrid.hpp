#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "greyvalve/lssvm.hpp"
#include "greyvalve/mechanism.hpp"

namespace greyvalve {

// Input-vector layouts. Order is fixed: (P1 kPa, P2 kPa, X stroke fraction[, T K]).
enum class FeatureSet { P1P2X, P1P2XT };

std::size_t arity(FeatureSet fs);
std::vector<std::string> feature_names(FeatureSet fs);
std::string_view to_string(FeatureSet fs);          // "p1p2x" / "p1p2xt"
FeatureSet parse_feature_set(std::string_view name);  // throws InputError

// rho1(T) = rho_ref (1 - alpha_T (T - T_ref)); disabled -> fluid.rho1.
struct DensityLaw {
    bool enabled = false;
    double rho_ref = 998.2;
    double alpha_T = 2.1e-4;
    double T_ref = 293.15;

    double density(double T) const;
    void validate() const;
};

// Vena-contracta pressure is taken as P2 both when extracting area targets
// and when predicting.
inline constexpr std::string_view kPvcConvention = "p2";

struct HybridSample {
    std::vector<double> features;  // current block first, then `lag` earlier blocks
    double q = 0.0;                // measured flow, m^3/s
    double pvc = 0.0;              // kPa

    // pvc taken from the P2 feature.
    static HybridSample from_features(std::vector<double> features, double q);
};

// Effective area that makes the orifice equation reproduce sample.q.
// p1 == pvc is only admissible with q == 0 (returns 0).
double area_target(const HybridSample& sample, const ValveGeometry& geom, double rho1);
double area_target(const HybridSample& sample, const ValveGeometry& geom,
                   const FluidProperties& fluid);

struct HybridOptions {
    DensityLaw density;
    std::size_t lag = 0;       // number of earlier feature blocks appended
    bool normalize = true;     // z-score the LSSVM inputs
    bool auto_sigma = false;   // replace an Rbf sigma with the median heuristic
};

// Mechanism equation with the flow area supplied by an LSSVM:
//   Q = Cv eps f(x) / sqrt(1 - beta^4) sqrt(2 (P1 - P2) / rho1)
class HybridValveModel {
public:
    HybridValveModel(ValveGeometry geom, FluidProperties fluid, DensityLaw density,
                     FeatureSet fs, std::size_t lag, TrainedLssvm area_model);

    const ValveGeometry& geometry() const { return geom_; }
    const FluidProperties& fluid() const { return fluid_; }
    const DensityLaw& density_law() const { return density_; }
    FeatureSet feature_set() const { return fs_; }
    std::size_t lag() const { return lag_; }
    const TrainedLssvm& area_model() const { return area_; }
    std::size_t input_dim() const { return arity(fs_) * (lag_ + 1); }

    // Density the mechanism uses for this feature vector: the density law at
    // the T feature when the layout has one and the law is enabled, else rho1.
    double mechanism_density(std::span<const double> features) const;

    // Clamped effective area f(x) >= 0, m^2.
    double predict_area(std::span<const double> features) const;
    double predict_flow(std::span<const double> features) const;

private:
    ValveGeometry geom_;
    FluidProperties fluid_;
    DensityLaw density_;
    FeatureSet fs_;
    std::size_t lag_;
    TrainedLssvm area_;
};

double mechanism_density(FeatureSet fs, const DensityLaw& law, const FluidProperties& fluid,
                         std::span<const double> features);

// Extracts area targets for every sample and trains the area model.
// Throws InconsistentSampleError listing every offending sample.
HybridValveModel fit_hybrid(std::span<const HybridSample> data, FeatureSet fs,
                            const ValveGeometry& geom, const FluidProperties& fluid,
                            const KernelSpec& kernel, double C, const HybridOptions& opts = {});

double predict_flow(const HybridValveModel& model, std::span<const double> features);

}  // namespace greyvalve
