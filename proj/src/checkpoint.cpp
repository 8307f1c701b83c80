#include "eegbench/checkpoint.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "eegbench/npy.hpp"

namespace eegbench {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void save_checkpoint(const fs::path& dir, const Model& model) {
  fs::create_directories(dir);
  const ModelSpec& s = model.spec();
  ordered_json j;
  j["format"] = "eegbench-checkpoint-1";
  j["architecture"] = to_string(s.architecture);
  j["input_len"] = s.input_len;
  j["feature_maps"] = s.feature_maps;
  j["branch_width"] = s.branch_width;
  j["hidden_size"] = s.hidden_size;
  j["dropout"] = s.dropout;
  j["init_seed"] = s.init_seed;
  ordered_json params = ordered_json::array();
  for (const auto& p : model.named_parameters()) {
    save_npy(dir / (p.name + ".npy"), p.tensor.values(), p.tensor.shape());
    params.push_back({{"name", p.name}, {"shape", p.tensor.shape()}});
  }
  j["parameters"] = params;
  ordered_json norms = ordered_json::array();
  // batchnorm_states is non-const because it hands out mutable pointers; saving only reads.
  for (const auto& n : const_cast<Model&>(model).batchnorm_states()) {
    save_npy(dir / (n.name + ".running_mean.npy"), n.state->running_mean, {n.state->running_mean.size()});
    save_npy(dir / (n.name + ".running_var.npy"), n.state->running_var, {n.state->running_var.size()});
    norms.push_back(n.name);
  }
  j["batchnorm"] = norms;
  std::ofstream(dir / "model.json") << j.dump(2) << '\n';
}

std::unique_ptr<Model> load_checkpoint(const fs::path& dir) {
  const fs::path manifest = dir / "model.json";
  std::ifstream in(manifest);
  if (!in) throw FormatError(manifest.string() + ": not found");
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw FormatError(manifest.string() + ": " + e.what());
  }
  ModelSpec s;
  try {
    s.architecture = parse_architecture(j.at("architecture").get<std::string>());
    s.input_len = j.at("input_len").get<std::size_t>();
    s.feature_maps = j.at("feature_maps").get<std::size_t>();
    s.branch_width = j.at("branch_width").get<std::size_t>();
    s.hidden_size = j.at("hidden_size").get<std::size_t>();
    s.dropout = j.at("dropout").get<double>();
    s.init_seed = j.at("init_seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(manifest.string() + ": " + e.what());
  }
  auto model = build_model(s);
  for (const auto& p : model->named_parameters()) {
    const NpyArray a = read_npy(dir / (p.name + ".npy"));
    if (a.shape != p.tensor.shape())
      throw FormatError((dir / (p.name + ".npy")).string() + ": shape " + ad::shape_str(a.shape) + ", expected " +
                        ad::shape_str(p.tensor.shape()));
    ad::Tensor handle = p.tensor;
    handle.values() = a.data;
  }
  for (const auto& n : model->batchnorm_states()) {
    for (auto [suffix, target] : {std::pair{".running_mean.npy", &n.state->running_mean},
                                  std::pair{".running_var.npy", &n.state->running_var}}) {
      const fs::path f = dir / (n.name + suffix);
      const NpyArray a = read_npy(f);
      if (a.data.size() != target->size())
        throw FormatError(f.string() + ": " + std::to_string(a.data.size()) + " values, expected " +
                          std::to_string(target->size()));
      *target = a.data;
    }
  }
  return model;
}

}  // namespace eegbench
