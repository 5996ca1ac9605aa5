#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "greyvalve/hybrid.hpp"
#include "greyvalve/lssvm.hpp"

namespace greyvalve {

inline constexpr int kModelFormatVersion = 1;

// Pure data model: the LSSVM maps the feature vector straight to flow.
struct DirectModel {
    FeatureSet fs = FeatureSet::P1P2X;
    std::size_t lag = 0;
    TrainedLssvm model;

    double predict_flow(std::span<const double> features) const { return model.predict(features); }
};

using FlowModel = std::variant<HybridValveModel, DirectModel>;

double predict_flow(const FlowModel& m, std::span<const double> features);
FeatureSet feature_set_of(const FlowModel& m);
std::size_t lag_of(const FlowModel& m);

// {format_version, kernel{type, params}, C, alpha[], b, train_x[[]],
//  feature_names[], norm{mean[], std[]} | null}
nlohmann::json to_json(const TrainedLssvm& m);
TrainedLssvm lssvm_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ValveGeometry& g);
nlohmann::json to_json(const FluidProperties& f);
nlohmann::json to_json(const DensityLaw& d);
// Missing keys keep the defaults of `base`.
ValveGeometry geometry_from_json(const nlohmann::json& j, ValveGeometry base = {});
FluidProperties fluid_from_json(const nlohmann::json& j, FluidProperties base = {});
DensityLaw density_law_from_json(const nlohmann::json& j, DensityLaw base = {});

// Hybrid documents embed the lssvm document and add
// {geom, fluid, feature_set, pvc_convention, density_law}.
nlohmann::json to_json(const FlowModel& m);
// Throws InputError on schema problems or a format_version mismatch.
FlowModel flow_model_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const FlowModel& m);
// IoError when unreadable, InputError when not a valid model document.
FlowModel load_model(const std::filesystem::path& path);

}  // namespace greyvalve
