#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "veli/model/veli_model.hpp"

namespace veli::model {

/// Writes the model as a checkpoint container: the five heads as nets named
/// `<head>.trunk`, `<head>.mean`, `<head>.log_variance` plus metadata for
/// d, r, hidden, K, the loss weights, the standardization statistics, the
/// seed and an optional configuration hash.
void save_model(std::ostream& out, const VeliModel& model, const std::string& config_hash = {});
VeliModel load_model(std::istream& in);

void save_model_file(const std::filesystem::path& path, const VeliModel& model,
                     const std::string& config_hash = {});
VeliModel load_model_file(const std::filesystem::path& path);

}  // namespace veli::model
