#pragma once

#include "disent/network.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace disent {

inline constexpr int kModelFormatVersion = 1;

// Versioned JSON document with keys in a fixed (sorted) order. Doubles are
// written in shortest round-trip form, so save/load is value-exact.
std::string model_to_json(const MlpModel& model);
MlpModel model_from_json(std::string_view text);

void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace disent
