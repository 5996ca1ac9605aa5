#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "greyvalve/simulator.hpp"

namespace greyvalve {

// Simulation config document. Every key is optional; see
// configs/README.md for the schema. Errors are InputError with the field
// path at the start of the message.
SimConfig sim_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimConfig& cfg);
nlohmann::json to_json(const Profile& p);
Profile profile_from_json(const nlohmann::json& j, const std::string& name);

// IoError when unreadable; InputError on JSON syntax (with line) or schema errors.
SimConfig load_sim_config(const std::filesystem::path& path);
nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace greyvalve
