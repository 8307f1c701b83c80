#pragma once

#include <filesystem>
#include <memory>

#include "eegbench/models.hpp"

namespace eegbench {

// Directory of <parameter>.npy files, <norm>.running_mean.npy / .running_var.npy, and
// model.json holding the ModelSpec plus the parameter index.
void save_checkpoint(const std::filesystem::path& dir, const Model& model);
std::unique_ptr<Model> load_checkpoint(const std::filesystem::path& dir);

}  // namespace eegbench
