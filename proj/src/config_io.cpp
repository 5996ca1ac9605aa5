#include "greyvalve/config_io.hpp"

#include <fstream>
#include <set>

#include "greyvalve/error.hpp"
#include "greyvalve/model_io.hpp"

namespace greyvalve {

using nlohmann::json;

namespace {

double num(const json& j, const std::string& name) {
    if (!j.is_number()) throw InputError(name + " must be a number");
    return j.get<double>();
}

void read(const json& j, const char* key, double& dst, const std::string& prefix = "") {
    if (j.contains(key)) dst = num(j.at(key), prefix + key);
}

std::vector<std::pair<double, double>> points_from_json(const json& j, const std::string& name) {
    if (!j.is_array()) throw InputError(name + ".points must be an array of [t, value] pairs");
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : j) {
        if (!p.is_array() || p.size() != 2) throw InputError(name + ".points entries must be [t, value]");
        pts.emplace_back(num(p[0], name + ".points"), num(p[1], name + ".points"));
    }
    return pts;
}

const std::set<std::string> kTopLevelKeys{
    "dt", "duration", "seed", "tau", "x0", "ac_max", "characteristic", "cv_profile",
    "p1_profile", "p2_profile", "temp_profile", "base_pressures", "base_temp", "geometry",
    "fluid", "density_law", "noise", "tunables", "faults"};

}  // namespace

Profile profile_from_json(const json& j, const std::string& name) {
    if (j.is_number()) return Profile::constant(j.get<double>());
    if (!j.is_object()) throw InputError(name + " must be a number or an object");
    const std::string type = j.value("type", std::string("constant"));
    Profile p;
    if (type == "constant") {
        p = Profile::constant(num(j.at("value"), name + ".value"));
    } else if (type == "sine") {
        p.kind = Profile::Kind::Sine;
        read(j, "offset", p.value, name + ".");
        read(j, "amplitude", p.amplitude, name + ".");
        read(j, "period", p.period, name + ".");
        read(j, "phase", p.phase, name + ".");
    } else if (type == "step") {
        p = Profile::steps(points_from_json(j.value("points", json()), name));
    } else if (type == "table") {
        p = Profile::table(points_from_json(j.value("points", json()), name));
    } else {
        throw InputError(name + ".type: unknown profile type '" + type + "'");
    }
    p.validate(name);
    return p;
}

json to_json(const Profile& p) {
    switch (p.kind) {
        case Profile::Kind::Constant: return {{"type", "constant"}, {"value", p.value}};
        case Profile::Kind::Sine:
            return {{"type", "sine"}, {"offset", p.value}, {"amplitude", p.amplitude},
                    {"period", p.period}, {"phase", p.phase}};
        case Profile::Kind::Step:
        case Profile::Kind::Table: {
            json pts = json::array();
            for (const auto& [t, v] : p.points) pts.push_back({t, v});
            return {{"type", p.kind == Profile::Kind::Step ? "step" : "table"}, {"points", pts}};
        }
    }
    return {};
}

SimConfig sim_config_from_json(const json& j) {
    if (!j.is_object()) throw InputError("config: top level must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!kTopLevelKeys.count(key)) throw InputError(key + ": unknown config field");
    }
    SimConfig c;
    try {
        read(j, "dt", c.dt);
        read(j, "duration", c.duration);
        read(j, "tau", c.tau);
        read(j, "x0", c.x0);
        read(j, "ac_max", c.acMax);
        if (j.contains("seed")) {
            if (!j.at("seed").is_number_integer() || j.at("seed").get<long long>() < 0) {
                throw InputError("seed must be a non-negative integer");
            }
            c.seed = j.at("seed").get<std::uint64_t>();
        }
        if (j.contains("characteristic")) {
            const json& ch = j.at("characteristic");
            const std::string type = ch.is_string() ? ch.get<std::string>() : ch.value("type", std::string("linear"));
            if (type == "linear") c.characteristic.kind = ValveCharacteristic::Kind::Linear;
            else if (type == "equal_percentage") c.characteristic.kind = ValveCharacteristic::Kind::EqualPercentage;
            else throw InputError("characteristic.type: unknown characteristic '" + type + "'");
            if (ch.is_object()) read(ch, "rangeability", c.characteristic.rangeability, "characteristic.");
        }
        if (j.contains("base_pressures")) {
            const json& bp = j.at("base_pressures");
            if (bp.contains("p1")) c.p1 = Profile::constant(num(bp.at("p1"), "base_pressures.p1"));
            if (bp.contains("p2")) c.p2 = Profile::constant(num(bp.at("p2"), "base_pressures.p2"));
        }
        if (j.contains("base_temp")) c.temp = Profile::constant(num(j.at("base_temp"), "base_temp"));
        if (j.contains("cv_profile")) c.cv = profile_from_json(j.at("cv_profile"), "cv_profile");
        if (j.contains("p1_profile")) c.p1 = profile_from_json(j.at("p1_profile"), "p1_profile");
        if (j.contains("p2_profile")) c.p2 = profile_from_json(j.at("p2_profile"), "p2_profile");
        if (j.contains("temp_profile")) c.temp = profile_from_json(j.at("temp_profile"), "temp_profile");
        if (j.contains("geometry")) c.geom = geometry_from_json(j.at("geometry"), c.geom);
        if (j.contains("fluid")) c.fluid = fluid_from_json(j.at("fluid"), c.fluid);
        if (j.contains("density_law")) c.density = density_law_from_json(j.at("density_law"), c.density);
        if (j.contains("noise")) {
            const json& n = j.at("noise");
            read(n, "x", c.noise.x, "noise.");
            read(n, "p1", c.noise.p1, "noise.");
            read(n, "p2", c.noise.p2, "noise.");
            read(n, "q", c.noise.q, "noise.");
            if (n.contains("relative")) c.noise.relative = n.at("relative").get<bool>();
        }
        if (j.contains("tunables")) {
            const json& t = j.at("tunables");
            auto& k = c.tunables;
            const std::string p = "tunables.";
            read(t, "sedimentation", k.sedimentation, p);
            read(t, "erosion", k.erosion, p);
            read(t, "friction_tau", k.friction_tau, p);
            read(t, "friction_band", k.friction_band, p);
            read(t, "external_leak", k.external_leak, p);
            read(t, "internal_leak", k.internal_leak, p);
            read(t, "choke_margin", k.choke_margin, p);
            read(t, "rod_twist", k.rod_twist, p);
            read(t, "spring_offset", k.spring_offset, p);
            read(t, "transducer_bias", k.transducer_bias, p);
            read(t, "rod_sensor_bias", k.rod_sensor_bias, p);
            read(t, "pressure_sensor_bias", k.pressure_sensor_bias, p);
            read(t, "feedback_hold", k.feedback_hold, p);
            read(t, "supply_drop", k.supply_drop, p);
            read(t, "pressure_shift", k.pressure_shift, p);
            read(t, "bypass", k.bypass, p);
            read(t, "flow_sensor_bias", k.flow_sensor_bias, p);
        }
        if (j.contains("faults")) {
            if (!j.at("faults").is_array()) throw InputError("faults must be an array");
            std::size_t idx = 0;
            for (const auto& fj : j.at("faults")) {
                const std::string name = "faults[" + std::to_string(idx++) + "]";
                if (!fj.contains("id")) throw InputError(name + ".id is required");
                const json& idj = fj.at("id");
                const int id = idj.is_string() ? parse_fault_id(idj.get<std::string>())
                                               : parse_fault_id(std::to_string(idj.get<int>()));
                FaultSpec f = FaultSpec::make(id, 0.0);
                read(fj, "intensity", f.intensity, name + ".");
                read(fj, "onset", f.onset, name + ".");
                if (fj.contains("development")) {
                    f.development = parse_fault_development(fj.at("development").get<std::string>());
                    if (f.development == FaultDevelopment::RapidlyDeveloping) f.rampDuration = kDefaultRapidRamp;
                    if (f.development == FaultDevelopment::SlowlyDeveloping) f.rampDuration = kDefaultSlowRamp;
                }
                read(fj, "ramp_duration", f.rampDuration, name + ".");
                c.faults.push_back(f);
            }
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

json to_json(const SimConfig& c) {
    json j;
    j["dt"] = c.dt;
    j["duration"] = c.duration;
    j["seed"] = c.seed;
    j["tau"] = c.tau;
    j["x0"] = c.x0;
    j["ac_max"] = c.acMax;
    j["characteristic"] = {
        {"type", c.characteristic.kind == ValveCharacteristic::Kind::Linear ? "linear" : "equal_percentage"},
        {"rangeability", c.characteristic.rangeability}};
    j["cv_profile"] = to_json(c.cv);
    j["p1_profile"] = to_json(c.p1);
    j["p2_profile"] = to_json(c.p2);
    j["temp_profile"] = to_json(c.temp);
    j["geometry"] = to_json(c.geom);
    j["fluid"] = to_json(c.fluid);
    j["density_law"] = to_json(c.density);
    j["noise"] = {{"x", c.noise.x}, {"p1", c.noise.p1}, {"p2", c.noise.p2}, {"q", c.noise.q},
                  {"relative", c.noise.relative}};
    const auto& k = c.tunables;
    j["tunables"] = {{"sedimentation", k.sedimentation},
                     {"erosion", k.erosion},
                     {"friction_tau", k.friction_tau},
                     {"friction_band", k.friction_band},
                     {"external_leak", k.external_leak},
                     {"internal_leak", k.internal_leak},
                     {"choke_margin", k.choke_margin},
                     {"rod_twist", k.rod_twist},
                     {"spring_offset", k.spring_offset},
                     {"transducer_bias", k.transducer_bias},
                     {"rod_sensor_bias", k.rod_sensor_bias},
                     {"pressure_sensor_bias", k.pressure_sensor_bias},
                     {"feedback_hold", k.feedback_hold},
                     {"supply_drop", k.supply_drop},
                     {"pressure_shift", k.pressure_shift},
                     {"bypass", k.bypass},
                     {"flow_sensor_bias", k.flow_sensor_bias}};
    json faults = json::array();
    for (const auto& f : c.faults) {
        faults.push_back({{"id", fault_label(f.id)},
                          {"intensity", f.intensity},
                          {"onset", f.onset},
                          {"development", std::string(to_string(f.development))},
                          {"ramp_duration", f.rampDuration}});
    }
    j["faults"] = faults;
    return j;
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

SimConfig load_sim_config(const std::filesystem::path& path) {
    return sim_config_from_json(load_json(path));
}

}  // namespace greyvalve
