#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "greyvalve/hybrid.hpp"
#include "greyvalve/mechanism.hpp"

namespace greyvalve {

// ---------------------------------------------------------------------------
// Fault catalog of the benchmark actuator (f1 .. f19)
// ---------------------------------------------------------------------------

inline constexpr int kFaultCount = 19;

enum class FaultDevelopment { Abrupt, SlowlyDeveloping, RapidlyDeveloping };

std::string_view to_string(FaultDevelopment d);          // "abrupt", "slowly developing", ...
FaultDevelopment parse_fault_development(std::string_view s);

struct FaultCatalogEntry {
    int id;
    std::string_view group;
    std::string_view description;
    double lo;  // legal intensity interval [lo, hi]
    double hi;
    FaultDevelopment type;
};

std::span<const FaultCatalogEntry> fault_catalog();
const FaultCatalogEntry& catalog_entry(int id);  // throws InputError for ids outside 1..19
std::string fault_label(int id);                 // "f7"
int parse_fault_id(std::string_view label);      // "f7", "F7" or "7"
// "<0,1>" / "<-1,1>"
std::string direction_label(const FaultCatalogEntry& e);

inline constexpr double kDefaultSlowRamp = 100.0;  // s
inline constexpr double kDefaultRapidRamp = 10.0;  // s

struct FaultSpec {
    int id = 1;
    double intensity = 0.0;
    double onset = 0.0;  // s
    FaultDevelopment development = FaultDevelopment::Abrupt;
    double rampDuration = kDefaultSlowRamp;  // s, ignored for Abrupt

    // Development type and ramp taken from the catalog entry.
    static FaultSpec make(int id, double intensity, double onset = 0.0);
    void validate() const;
};

// 0 before onset; step to intensity (Abrupt) or linear ramp over rampDuration.
double effective_intensity(const FaultSpec& f, double t);

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

// Scalar signal of time.
struct Profile {
    enum class Kind { Constant, Step, Sine, Table };
    Kind kind = Kind::Constant;
    double value = 0.0;      // Constant value, Sine offset
    double amplitude = 0.0;  // Sine
    double period = 1.0;     // Sine, s
    double phase = 0.0;      // Sine, rad
    // Step: (t_i, v_i) holds v_i from t_i on (v_0 before t_0).
    // Table: piecewise-linear through the points, flat outside.
    std::vector<std::pair<double, double>> points;

    static Profile constant(double v);
    static Profile sine(double offset, double amplitude, double period, double phase = 0.0);
    static Profile steps(std::vector<std::pair<double, double>> pts);
    static Profile table(std::vector<std::pair<double, double>> pts);

    double at(double t) const;
    void validate(const std::string& name) const;
};

struct ValveCharacteristic {
    enum class Kind { Linear, EqualPercentage };
    Kind kind = Kind::Linear;
    double rangeability = 50.0;

    // Linear: X. Equal-percentage: R^(X - 1).
    double operator()(double x) const;
};

// Per-channel sensor noise standard deviations. With `relative` set the
// noise is multiplicative: sensed = v (1 + std n).
struct NoiseSpec {
    double x = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;
    double q = 0.0;
    bool relative = false;
};

// Magnitudes of the fault effects. None of these come from measured data;
// they set how strongly each catalog fault perturbs the surrogate plant.
struct FaultTunables {
    double sedimentation = 0.5;      // f2: char(X) * (1 - k z)
    double erosion = 0.5;            // f3: char(X) * (1 + k z)
    double friction_tau = 4.0;       // f4: tau * (1 + k |z|)
    double friction_band = 0.02;     // f4: backlash half-width k |z|
    double external_leak = 0.05;     // f5: p1 * (1 - k z)
    double internal_leak = 0.05;     // f6: + k z q_full_open
    double choke_margin = 0.5;       // f7: at z = 1 the choked threshold is k * dp
    double rod_twist = 1.0;          // f8: cv * (1 - k z)
    double spring_offset = 0.1;      // f11: cv + k z
    double transducer_bias = 0.1;    // f12: cv + k z
    double rod_sensor_bias = 0.1;    // f13: x_sensed + k z
    double pressure_sensor_bias = 0.02;  // f14: p1_sensed * (1 + k z)
    double feedback_hold = 0.5;      // f15: hold cv_eff while z > k
    double supply_drop = 0.9;        // f16: tau / (1 - k z)
    double pressure_shift = 0.1;     // f17: p1 * (1 + k z)
    double bypass = 0.2;             // f18: + k z q_full_open
    double flow_sensor_bias = 0.05;  // f19: q_sensed * (1 + k z)
};

struct SimConfig {
    double dt = 0.02;        // s
    double duration = 60.0;  // s
    std::uint64_t seed = 0;
    double tau = 1.0;        // actuator time constant, s
    double x0 = 0.0;         // initial stroke
    double acMax = 5e-4;     // full-open flow area, m^2
    ValveCharacteristic characteristic;
    Profile cv = Profile::constant(0.5);
    Profile p1 = Profile::constant(500.0);   // kPa
    Profile p2 = Profile::constant(300.0);   // kPa
    Profile temp = Profile::constant(293.15);  // K
    ValveGeometry geom{0.0, 0.5, 0.95, 1.0, 0.9};  // Ac unused
    FluidProperties fluid;
    DensityLaw density;
    NoiseSpec noise;
    FaultTunables tunables;
    std::vector<FaultSpec> faults;

    // Number of records a run produces: floor(duration / dt).
    std::size_t steps() const;
    // Throws InputError whose message starts with the offending field name.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

struct TelemetryRecord {
    double t = 0.0;
    double cv = 0.0;
    double x = 0.0;
    double xSensed = 0.0;
    double p1 = 0.0;
    double p1Sensed = 0.0;
    double p2 = 0.0;
    double p2Sensed = 0.0;
    double temp = 0.0;
    double q = 0.0;
    double qSensed = 0.0;
    std::vector<std::pair<int, double>> activeFaults;  // (id, effective intensity != 0)
};

struct SimState {
    double x = 0.0;           // stroke at the current time
    double cvEffPrev = 0.0;   // last effective command (f15 hold)
    double hystTarget = 0.0;  // backlash output (f4)
    std::size_t step = 0;
};

// Independent Gaussian streams per sensor channel, derived from one seed so
// that using one channel never shifts another channel's draws.
class NoiseStreams {
public:
    enum Channel : std::size_t { X = 0, P1 = 1, P2 = 2, Q = 3, Count = 4 };

    explicit NoiseStreams(std::uint64_t seed);
    double draw(Channel c);

private:
    std::array<std::mt19937_64, Count> engines_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

SimState initial_state(const SimConfig& cfg);

// Records the plant at time t (state.x is the stroke at t) and advances the
// actuator by one explicit Euler step of cfg.dt.
std::pair<SimState, TelemetryRecord> step(const SimState& state, double cv, const SimConfig& cfg,
                                          double t, NoiseStreams& rng);

std::vector<TelemetryRecord> run(const SimConfig& cfg);

}  // namespace greyvalve
