#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include "greyvalve/error.hpp"
#include "greyvalve/simulator.hpp"

namespace greyvalve {

namespace {

using D = FaultDevelopment;

constexpr std::string_view kValve = "Control valve faults";
constexpr std::string_view kServo = "Pneumatic servo-motor faults";
constexpr std::string_view kPositioner = "Positioner faults";
constexpr std::string_view kGeneral = "General faults / external faults";

constexpr std::array<FaultCatalogEntry, kFaultCount> kCatalog{{
    {1, kValve, "Valve clogging", 0, 1, D::Abrupt},
    {2, kValve, "Valve plug or valve seat sedimentation", 0, 1, D::SlowlyDeveloping},
    {3, kValve, "Valve plug or valve seat erosion", 0, 1, D::SlowlyDeveloping},
    {4, kValve, "Increased of valve or bushing friction", -1, 1, D::SlowlyDeveloping},
    {5, kValve, "External leakage (leaky bushing, covers, terminals)", 0, 1, D::SlowlyDeveloping},
    {6, kValve, "Internal leakage (valve tightness)", 0, 1, D::SlowlyDeveloping},
    {7, kValve, "Medium evaporation or critical flow", 0, 1, D::Abrupt},
    {8, kServo, "Twisted servo-motor's piston rod", 0, 1, D::Abrupt},
    {9, kServo, "Servo-motor's housing or terminals tightness", 0, 1, D::Abrupt},
    {10, kServo, "Servo-motor's diaphragm perforation", 0, 1, D::Abrupt},
    {11, kServo, "Servo-motor's spring fault", 0, 1, D::Abrupt},
    {12, kPositioner, "Electro-pneumatic transducer fault", -1, 1, D::Abrupt},
    {13, kPositioner, "Rod displacement sensor fault", -1, 1, D::SlowlyDeveloping},
    {14, kPositioner, "Pressure sensor fault", -1, 1, D::Abrupt},
    {15, kPositioner, "Positioner feedback fault", 0, 1, D::Abrupt},
    {16, kGeneral, "Positioner supply pressure drop", 0, 1, D::RapidlyDeveloping},
    {17, kGeneral, "Unexpected pressure change across the valve", -1, 1, D::RapidlyDeveloping},
    {18, kGeneral, "Fully or partly opened bypass valves", 0, 1, D::Abrupt},
    {19, kGeneral, "Flow rate sensor fault", -1, 1, D::Abrupt},
}};

}  // namespace

std::string_view to_string(FaultDevelopment d) {
    switch (d) {
        case D::Abrupt: return "abrupt";
        case D::SlowlyDeveloping: return "slowly developing";
        case D::RapidlyDeveloping: return "rapidly developing";
    }
    return "abrupt";
}

FaultDevelopment parse_fault_development(std::string_view s) {
    std::string norm;
    for (char c : s) norm.push_back(c == '_' || c == '-' ? ' ' : static_cast<char>(std::tolower(c)));
    if (norm == "abrupt") return D::Abrupt;
    if (norm == "slowly developing" || norm == "slow") return D::SlowlyDeveloping;
    if (norm == "rapidly developing" || norm == "rapid") return D::RapidlyDeveloping;
    throw InputError("unknown fault development '" + std::string(s) +
                     "' (expected abrupt, slowly_developing or rapidly_developing)");
}

std::span<const FaultCatalogEntry> fault_catalog() { return kCatalog; }

const FaultCatalogEntry& catalog_entry(int id) {
    if (id < 1 || id > kFaultCount) {
        throw InputError("fault id " + std::to_string(id) + " is outside f1..f19");
    }
    return kCatalog[static_cast<std::size_t>(id - 1)];
}

std::string fault_label(int id) { return "f" + std::to_string(id); }

int parse_fault_id(std::string_view label) {
    std::string_view digits = label;
    if (!digits.empty() && (digits.front() == 'f' || digits.front() == 'F')) digits.remove_prefix(1);
    int id = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty()) {
        throw InputError("invalid fault id '" + std::string(label) + "'");
    }
    catalog_entry(id);
    return id;
}

std::string direction_label(const FaultCatalogEntry& e) {
    return e.lo < 0 ? "<-1,1>" : "<0,1>";
}

FaultSpec FaultSpec::make(int id, double intensity, double onset) {
    const auto& e = catalog_entry(id);
    FaultSpec f;
    f.id = id;
    f.intensity = intensity;
    f.onset = onset;
    f.development = e.type;
    f.rampDuration = e.type == D::RapidlyDeveloping ? kDefaultRapidRamp : kDefaultSlowRamp;
    return f;
}

void FaultSpec::validate() const {
    const auto& e = catalog_entry(id);
    const std::string name = "faults[" + fault_label(id) + "]";
    if (!std::isfinite(intensity) || intensity < e.lo || intensity > e.hi) {
        throw InputError(name + ".intensity " + std::to_string(intensity) + " outside " +
                         direction_label(e));
    }
    if (!std::isfinite(onset) || onset < 0.0) throw InputError(name + ".onset must be >= 0");
    if (development != D::Abrupt && !(rampDuration > 0.0 && std::isfinite(rampDuration))) {
        throw InputError(name + ".ramp_duration must be > 0 for developing faults");
    }
}

double effective_intensity(const FaultSpec& f, double t) {
    if (t < f.onset) return 0.0;
    if (f.development == D::Abrupt) return f.intensity;
    const double frac = std::min(1.0, (t - f.onset) / f.rampDuration);
    return f.intensity * frac;
}

}  // namespace greyvalve
