#pragma once

#include <nlohmann/json.hpp>

#include "sumer/learners.hpp"
#include "sumer/synthgen.hpp"

namespace sumer {

/// JSON forms of learner specs, shared by model files and experiment
/// configs. Parsing rejects unknown keys with ValidationError.
nlohmann::json to_json(const ClassifierSpec& spec);
ClassifierSpec classifier_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SpreadSpec& spec);
SpreadSpec spread_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const NoiseSpec& spec);
NoiseSpec noise_spec_from_json(const nlohmann::json& j);

/// Throws ValidationError naming the first key of `j` not in `allowed`.
void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                         std::string_view context);

}  // namespace sumer
