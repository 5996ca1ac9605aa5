#include "greyvalve/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "greyvalve/error.hpp"

namespace greyvalve {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void require(bool ok, const std::string& what) {
    if (!ok) throw InputError(what);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

// Vapor pressure that puts the choked threshold FL^2 (p1 - F_F pv) at
// `target_dp`. F_F(pv) pv is increasing on [0, pCrit], so bisection applies.
double vapor_pressure_for_threshold(const ValveGeometry& geom, const FluidProperties& fluid,
                                    double p1, double target_dp) {
    const double want = p1 - target_dp / (geom.FL * geom.FL);
    if (want <= 0.0) return 0.0;
    auto g = [&](double pv) { return critical_pressure_ratio(pv, fluid.pCrit) * pv; };
    if (want >= g(fluid.pCrit)) return fluid.pCrit;
    double lo = 0.0;
    double hi = fluid.pCrit;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * fluid.pCrit; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < want ? lo : hi) = mid;
    }
    return hi;
}

}  // namespace

// ---------------------------------------------------------------------------
// Profile / characteristic
// ---------------------------------------------------------------------------

Profile Profile::constant(double v) {
    Profile p;
    p.value = v;
    return p;
}

Profile Profile::sine(double offset, double amplitude, double period, double phase) {
    Profile p;
    p.kind = Kind::Sine;
    p.value = offset;
    p.amplitude = amplitude;
    p.period = period;
    p.phase = phase;
    return p;
}

Profile Profile::steps(std::vector<std::pair<double, double>> pts) {
    Profile p;
    p.kind = Kind::Step;
    p.points = std::move(pts);
    return p;
}

Profile Profile::table(std::vector<std::pair<double, double>> pts) {
    Profile p;
    p.kind = Kind::Table;
    p.points = std::move(pts);
    return p;
}

double Profile::at(double t) const {
    switch (kind) {
        case Kind::Constant: return value;
        case Kind::Sine: return value + amplitude * std::sin(kTwoPi * t / period + phase);
        case Kind::Step: {
            double v = points.front().second;
            for (const auto& [ti, vi] : points) {
                if (t >= ti) v = vi;
                else break;
            }
            return v;
        }
        case Kind::Table: {
            if (t <= points.front().first) return points.front().second;
            if (t >= points.back().first) return points.back().second;
            const auto it = std::upper_bound(points.begin(), points.end(), t,
                                             [](double tv, const auto& p) { return tv < p.first; });
            const auto& [t1, v1] = *it;
            const auto& [t0, v0] = *(it - 1);
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
    }
    return value;
}

void Profile::validate(const std::string& name) const {
    switch (kind) {
        case Kind::Constant: require(std::isfinite(value), name + ".value must be finite"); break;
        case Kind::Sine:
            require(std::isfinite(value) && std::isfinite(amplitude) && std::isfinite(phase),
                    name + " sine parameters must be finite");
            require(period > 0.0 && std::isfinite(period), name + ".period must be > 0");
            break;
        case Kind::Step:
        case Kind::Table:
            require(!points.empty(), name + ".points must not be empty");
            for (std::size_t i = 0; i < points.size(); ++i) {
                require(std::isfinite(points[i].first) && std::isfinite(points[i].second),
                        name + ".points must be finite");
                if (i > 0) {
                    require(points[i].first > points[i - 1].first,
                            name + ".points times must be strictly increasing");
                }
            }
            break;
    }
}

double ValveCharacteristic::operator()(double x) const {
    if (kind == Kind::Linear) return x;
    return std::pow(rangeability, x - 1.0);
}

// ---------------------------------------------------------------------------
// SimConfig
// ---------------------------------------------------------------------------

std::size_t SimConfig::steps() const {
    return static_cast<std::size_t>(std::floor(duration / dt + 1e-9));
}

void SimConfig::validate() const {
    require(dt > 0.0 && std::isfinite(dt), "dt must be > 0");
    require(std::isfinite(duration) && duration >= dt, "duration must be >= dt");
    require(tau > 0.0 && std::isfinite(tau), "tau must be > 0");
    require(acMax > 0.0 && std::isfinite(acMax), "ac_max must be > 0");
    require(x0 >= 0.0 && x0 <= 1.0, "x0 must be in [0, 1]");
    if (characteristic.kind == ValveCharacteristic::Kind::EqualPercentage) {
        require(characteristic.rangeability > 1.0 && std::isfinite(characteristic.rangeability),
                "characteristic.rangeability must be > 1");
    }
    cv.validate("cv_profile");
    p1.validate("p1_profile");
    p2.validate("p2_profile");
    temp.validate("temp_profile");
    require(finite_nonneg(noise.x) && finite_nonneg(noise.p1) && finite_nonneg(noise.p2) &&
                finite_nonneg(noise.q),
            "noise standard deviations must be >= 0");
    ValveGeometry g = geom;
    g.Ac = 0.0;
    g.validate();
    fluid.validate();
    density.validate();

    std::set<int> seen;
    for (const auto& f : faults) {
        f.validate();
        require(seen.insert(f.id).second, "faults: duplicate entry for " + fault_label(f.id));
    }
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

NoiseStreams::NoiseStreams(std::uint64_t seed) {
    for (std::size_t c = 0; c < Count; ++c) {
        engines_[c].seed(splitmix64(seed ^ splitmix64(0xC0FFEEULL + c)));
    }
}

double NoiseStreams::draw(Channel c) {
    normal_.reset();
    return normal_(engines_[c]);
}

SimState initial_state(const SimConfig& cfg) {
    SimState s;
    s.x = cfg.x0;
    s.cvEffPrev = cfg.x0;
    s.hystTarget = cfg.x0;
    return s;
}

std::pair<SimState, TelemetryRecord> step(const SimState& state, double cv, const SimConfig& cfg,
                                          double t, NoiseStreams& rng) {
    if (!(cv >= 0.0 && cv <= 1.0)) {
        throw SimulationError(state.step, "control signal " + std::to_string(cv) +
                                              " outside [0, 1]");
    }
    const FaultTunables& k = cfg.tunables;
    std::array<double, kFaultCount + 1> z{};
    TelemetryRecord rec;
    rec.t = t;
    rec.cv = cv;
    for (const auto& f : cfg.faults) {
        z[static_cast<std::size_t>(f.id)] = effective_intensity(f, t);
        if (z[static_cast<std::size_t>(f.id)] != 0.0) {
            rec.activeFaults.emplace_back(f.id, z[static_cast<std::size_t>(f.id)]);
        }
    }
    std::sort(rec.activeFaults.begin(), rec.activeFaults.end());

    SimState next = state;
    next.step = state.step + 1;

    // cv path
    double cv_eff = cv;
    if (z[8] != 0.0) cv_eff *= 1.0 - k.rod_twist * z[8];
    if (z[11] != 0.0) cv_eff += k.spring_offset * z[11];
    if (z[12] != 0.0) cv_eff += k.transducer_bias * z[12];
    if (z[15] > k.feedback_hold) cv_eff = state.cvEffPrev;
    cv_eff = std::clamp(cv_eff, 0.0, 1.0);
    next.cvEffPrev = cv_eff;

    // actuator
    double target = cv_eff;
    if (z[9] != 0.0) target *= 1.0 - z[9];
    if (z[10] != 0.0) target *= 1.0 - z[10];
    if (z[4] != 0.0) {
        const double band = k.friction_band * std::abs(z[4]);
        double h = state.hystTarget;
        if (target > h + band) h = target - band;
        else if (target < h - band) h = target + band;
        target = h;
    }
    next.hystTarget = target;

    double tau_eff = cfg.tau;
    if (z[4] != 0.0) tau_eff *= 1.0 + k.friction_tau * std::abs(z[4]);
    if (z[16] != 0.0) tau_eff /= 1.0 - k.supply_drop * z[16];
    const double x_max = z[1] != 0.0 ? 1.0 - z[1] : 1.0;

    const double x = std::clamp(state.x, 0.0, x_max);
    next.x = std::clamp(x + cfg.dt / tau_eff * (target - x), 0.0, x_max);
    rec.x = x;

    // hydraulics
    const double p2 = cfg.p2.at(t);
    double p1 = cfg.p1.at(t);
    if (z[5] != 0.0) p1 *= 1.0 - k.external_leak * z[5];
    if (z[17] != 0.0) p1 *= 1.0 + k.pressure_shift * z[17];
    const double T = cfg.temp.at(t);
    rec.p1 = p1;
    rec.p2 = p2;
    rec.temp = T;

    const double rho = cfg.density.enabled ? cfg.density.density(T) : cfg.fluid.rho1;
    double char_x = cfg.characteristic(x);
    if (z[2] != 0.0) char_x *= 1.0 - k.sedimentation * z[2];
    if (z[3] != 0.0) char_x *= 1.0 + k.erosion * z[3];

    double q = 0.0;
    const double dp = p1 - p2;
    if (dp > 0.0 && p1 > 0.0) {
        double pv = std::min(vapor_pressure(cfg.fluid, T), cfg.fluid.pCrit);
        if (z[7] != 0.0) {
            const double forced =
                vapor_pressure_for_threshold(cfg.geom, cfg.fluid, p1, k.choke_margin * dp);
            pv += z[7] * std::max(0.0, forced - pv);
        }
        const double dp_choked = choked_pressure_drop(cfg.geom, p1, pv, cfg.fluid.pCrit);
        // Beyond the choked threshold extra pressure drop no longer adds flow.
        const double dp_eff = dp < dp_choked ? dp : std::max(0.0, dp_choked);

        ValveGeometry g = cfg.geom;
        g.Ac = cfg.acMax * char_x;
        q = orifice_flow(g, p1, p1 - dp_eff, rho);
        if (z[6] != 0.0 || z[18] != 0.0) {
            g.Ac = cfg.acMax;
            const double q_full = orifice_flow(g, p1, p1 - dp_eff, rho);
            if (z[6] != 0.0) q += k.internal_leak * z[6] * q_full;
            if (z[18] != 0.0) q += k.bypass * z[18] * q_full;
        }
    }
    rec.q = q;

    // sensors
    auto sense = [&](double v, double sd, NoiseStreams::Channel c) {
        if (sd == 0.0) return v;
        const double n = rng.draw(c);
        return cfg.noise.relative ? v + v * sd * n : v + sd * n;
    };
    double xs = x;
    if (z[13] != 0.0) xs += k.rod_sensor_bias * z[13];
    double p1s = p1;
    if (z[14] != 0.0) p1s *= 1.0 + k.pressure_sensor_bias * z[14];
    double qs = q;
    if (z[19] != 0.0) qs *= 1.0 + k.flow_sensor_bias * z[19];
    rec.xSensed = sense(xs, cfg.noise.x, NoiseStreams::X);
    rec.p1Sensed = sense(p1s, cfg.noise.p1, NoiseStreams::P1);
    rec.p2Sensed = sense(p2, cfg.noise.p2, NoiseStreams::P2);
    rec.qSensed = sense(qs, cfg.noise.q, NoiseStreams::Q);

    const double vals[] = {next.x, rec.x, rec.xSensed, rec.p1, rec.p1Sensed, rec.p2,
                           rec.p2Sensed, rec.temp, rec.q, rec.qSensed};
    for (double v : vals) {
        if (!std::isfinite(v)) throw SimulationError(state.step, "non-finite plant state");
    }
    return {next, rec};
}

std::vector<TelemetryRecord> run(const SimConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.steps();
    std::vector<TelemetryRecord> out;
    out.reserve(n);
    NoiseStreams rng(cfg.seed);
    SimState state = initial_state(cfg);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * cfg.dt;
        const double cv = std::clamp(cfg.cv.at(t), 0.0, 1.0);
        auto [next, rec] = step(state, cv, cfg, t, rng);
        state = next;
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace greyvalve
