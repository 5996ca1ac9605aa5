#pragma once

#include <optional>
#include <string_view>

namespace greyvalve {

// Unit conventions used throughout the library:
//   pressures      kPa (absolute)
//   temperatures   K
//   orifice flow   m^3/s
//   sizing flow    m^3/h (flow_coefficient only)
// The kPa -> Pa conversion happens inside orifice_flow and nowhere else.

// Medium constants.
struct FluidProperties {
    double rho1 = 998.2;        // upstream density, kg/m^3
    double rho0 = 999.1;        // reference density, kg/m^3
    double Rs = 461.5;          // specific gas constant of the vapor, J/(kg K)
    double dHvap = 2.257e6;     // specific heat of vaporization, J/kg
    double pCrit = 22565.0;     // critical pressure, kPa
    double vaporRefT = 373.15;  // calibration temperature, K
    double vaporRefP = 101.325; // vapor pressure at vaporRefT, kPa

    static FluidProperties water();
    // Same as water() but with Rs = 287 J/(kg K), the air value.
    static FluidProperties water_rs287();

    // Throws InputError naming the first violated field.
    void validate() const;
};

struct ValveGeometry {
    double Ac = 0.0;      // vena-contracta flow area, m^2
    double beta = 0.0;    // diameter ratio d_e / d_1
    double Cv = 1.0;      // flow velocity coefficient
    double epsilon = 1.0; // expansibility coefficient
    double FL = 0.9;      // pressure recovery coefficient

    void validate() const;
};

struct OperatingPoint {
    double p1 = 0.0;               // kPa
    double p2 = 0.0;               // kPa
    double T = 293.15;             // K
    std::optional<double> qv;      // m^3/h
    std::optional<double> ReV;     // valve Reynolds number

    double dp() const { return p1 - p2; }
    void validate() const;
};

enum class FlowRegime { NonChokedTurbulent, Laminar, ChokedCavitation, ChokedFlashing };

std::string_view to_string(FlowRegime regime);

inline constexpr double kLaminarReynoldsLimit = 1000.0;
inline constexpr double kDefaultN1 = 0.1;  // m^3/h with kPa

// Saturated vapor pressure from the integrated Clausius-Clapeyron relation,
// calibrated at (vaporRefT, vaporRefP). kPa.
double vapor_pressure(const FluidProperties& fluid, double T);

// F_F = 0.96 - 0.28 sqrt(pv / pCrit), in [0.68, 0.96].
double critical_pressure_ratio(double pv, double pCrit);

// Choked-flow pressure-drop threshold FL^2 (p1 - F_F pv). kPa, may be <= 0.
double choked_pressure_drop(const ValveGeometry& geom, double p1, double pv, double pCrit);

FlowRegime classify_regime(const OperatingPoint& op, const ValveGeometry& geom,
                           const FluidProperties& fluid);

// Thin-wall orifice volumetric flow, m^3/s.
double orifice_flow(const ValveGeometry& geom, double p1, double pvc, double rho1);

// Sizing flow coefficient for the non-choked regimes. FR is the Reynolds
// factor, only used for Laminar.
double flow_coefficient(const OperatingPoint& op, const FluidProperties& fluid,
                        FlowRegime regime, double N1 = kDefaultN1, double FR = 1.0);

}  // namespace greyvalve
