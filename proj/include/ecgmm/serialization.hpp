#pragma once

#include <filesystem>
#include <iosfwd>

#include <json.hpp>

#include "ecgmm/distributions.hpp"
#include "ecgmm/stack.hpp"

namespace ecgmm {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json to_json(const Emission& e);
nlohmann::json to_json(const TransitionTensor& t);
nlohmann::json to_json(const StackConfig& cfg);
nlohmann::json to_json(const StackModel& model);

Emission emission_from_json(const nlohmann::json& j);
TransitionTensor transition_from_json(const nlohmann::json& j);
StackConfig stack_config_from_json(const nlohmann::json& j);
StackModel model_from_json(const nlohmann::json& j);

void save_model(const StackModel& model, const std::filesystem::path& path);
StackModel load_model(const std::filesystem::path& path);

// layer,component,iteration,log_likelihood
void write_training_log_csv(const StackModel& model, std::ostream& out);

}  // namespace ecgmm
