#include "greyvalve/mechanism.hpp"

#include <cmath>
#include <string>

#include "greyvalve/error.hpp"

namespace greyvalve {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw InputError(what);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

FluidProperties FluidProperties::water() { return FluidProperties{}; }

FluidProperties FluidProperties::water_rs287() {
    FluidProperties f;
    f.Rs = 287.0;
    return f;
}

void FluidProperties::validate() const {
    require(finite_positive(rho1), "fluid.rho1 must be > 0");
    require(finite_positive(rho0), "fluid.rho0 must be > 0");
    require(finite_positive(Rs), "fluid.Rs must be > 0");
    require(finite_positive(dHvap), "fluid.dHvap must be > 0");
    require(finite_positive(pCrit), "fluid.pCrit must be > 0");
    require(finite_positive(vaporRefT), "fluid.vaporRefT must be > 0");
    require(finite_positive(vaporRefP) && vaporRefP <= pCrit,
            "fluid.vaporRefP must satisfy 0 < vaporRefP <= pCrit");
}

void ValveGeometry::validate() const {
    require(std::isfinite(Ac) && Ac >= 0.0, "geometry.Ac must be >= 0");
    require(std::isfinite(beta) && beta >= 0.0 && beta < 1.0, "geometry.beta must be in [0, 1)");
    require(finite_positive(Cv), "geometry.Cv must be > 0");
    require(finite_positive(epsilon) && epsilon <= 1.0, "geometry.epsilon must be in (0, 1]");
    require(finite_positive(FL) && FL <= 1.0, "geometry.FL must be in (0, 1]");
}

void OperatingPoint::validate() const {
    require(finite_positive(p1), "operating point p1 must be > 0");
    require(std::isfinite(p2) && p2 >= 0.0, "operating point p2 must be >= 0");
    require(p1 >= p2, "operating point requires p1 >= p2");
    require(finite_positive(T), "operating point T must be > 0");
    if (ReV) require(finite_positive(*ReV), "operating point ReV must be > 0");
    if (qv) require(std::isfinite(*qv), "operating point qv must be finite");
}

std::string_view to_string(FlowRegime regime) {
    switch (regime) {
        case FlowRegime::NonChokedTurbulent: return "non-choked-turbulent";
        case FlowRegime::Laminar: return "laminar";
        case FlowRegime::ChokedCavitation: return "choked-cavitation";
        case FlowRegime::ChokedFlashing: return "choked-flashing";
    }
    return "unknown";
}

double vapor_pressure(const FluidProperties& fluid, double T) {
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw DomainError("vapor_pressure: temperature must be > 0 K, got " + std::to_string(T));
    }
    // ln pv is affine in 1/T with slope -dHvap/Rs.
    const double slope = fluid.dHvap / fluid.Rs;
    return fluid.vaporRefP * std::exp(slope * (1.0 / fluid.vaporRefT - 1.0 / T));
}

double critical_pressure_ratio(double pv, double pCrit) {
    if (!(pCrit > 0.0)) throw DomainError("critical_pressure_ratio: pCrit must be > 0");
    if (!(pv >= 0.0) || pv > pCrit) {
        throw DomainError("critical_pressure_ratio: pv must be in [0, pCrit], got pv = " +
                          std::to_string(pv) + " kPa");
    }
    // lerp keeps both endpoints exact: 0.96 at pv = 0, 0.68 at pv = pCrit
    return std::lerp(0.96, 0.68, std::sqrt(pv / pCrit));
}

double choked_pressure_drop(const ValveGeometry& geom, double p1, double pv, double pCrit) {
    if (!(p1 > 0.0)) throw DomainError("choked_pressure_drop: p1 must be > 0");
    const double FF = critical_pressure_ratio(pv, pCrit);
    return geom.FL * geom.FL * (p1 - FF * pv);
}

FlowRegime classify_regime(const OperatingPoint& op, const ValveGeometry& geom,
                           const FluidProperties& fluid) {
    if (!op.ReV) throw InputError("classify_regime: valve Reynolds number ReV is required");
    op.validate();
    if (*op.ReV < kLaminarReynoldsLimit) return FlowRegime::Laminar;

    const double pv = vapor_pressure(fluid, op.T);
    const double dpT = choked_pressure_drop(geom, op.p1, pv, fluid.pCrit);
    if (op.dp() < dpT) return FlowRegime::NonChokedTurbulent;
    return op.p2 > pv ? FlowRegime::ChokedCavitation : FlowRegime::ChokedFlashing;
}

double orifice_flow(const ValveGeometry& geom, double p1, double pvc, double rho1) {
    if (!(p1 >= pvc)) {
        throw DomainError("orifice_flow: requires p1 >= pvc (p1 = " + std::to_string(p1) +
                          ", pvc = " + std::to_string(pvc) + ")");
    }
    if (!(rho1 > 0.0)) throw DomainError("orifice_flow: rho1 must be > 0");
    const double beta2 = geom.beta * geom.beta;
    const double area_term = geom.Ac / std::sqrt(1.0 - beta2 * beta2);
    return geom.Cv * geom.epsilon * area_term * std::sqrt(2.0 * (p1 - pvc) * 1000.0 / rho1);
}

double flow_coefficient(const OperatingPoint& op, const FluidProperties& fluid,
                        FlowRegime regime, double N1, double FR) {
    if (regime == FlowRegime::ChokedCavitation || regime == FlowRegime::ChokedFlashing) {
        throw NotApplicableError(std::string("flow_coefficient: no sizing formula for regime ") +
                                 std::string(to_string(regime)));
    }
    if (!op.qv || !(*op.qv > 0.0)) throw InputError("flow_coefficient: qv must be present and > 0");
    if (!(N1 > 0.0)) throw InputError("flow_coefficient: N1 must be > 0");
    const double dp = op.dp();
    if (!(dp > 0.0)) throw DomainError("flow_coefficient: pressure drop p1 - p2 must be > 0");

    const double density_ratio = fluid.rho1 / fluid.rho0;
    const double root = std::sqrt(density_ratio / dp);
    if (regime == FlowRegime::Laminar) {
        if (!(FR > 0.0) || FR > 1.0) throw DomainError("flow_coefficient: FR must be in (0, 1]");
        return *op.qv / (N1 * FR) * root;
    }
    return *op.qv / N1 * root;
}

}  // namespace greyvalve
