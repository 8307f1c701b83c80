#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "eegbench/adam.hpp"
#include "eegbench/dataset.hpp"
#include "eegbench/models.hpp"

namespace eegbench {

struct TrainConfig {
  std::size_t epochs = 1;
  std::size_t batch_size = 64;
  AdamConfig adam;
  std::uint64_t seed = 0;
  bool shuffle = true;

  void validate() const;
};

struct TrainRecord {
  std::vector<double> train_loss;    // per epoch, mean over batches weighted by batch size
  std::vector<double> val_loss;      // per epoch, full validation set in evaluation mode
  std::vector<double> wall_seconds;  // per epoch

  std::size_t epochs() const noexcept { return train_loss.size(); }
};

// Called after every epoch with (epoch starting at 1, train loss, val loss).
using EpochCallback = std::function<void(std::size_t, double, double)>;

// Minibatch Adam on the MSE between network output and normalized ground truth.
// Inputs and targets are both divided by the contaminated segment's standard deviation.
TrainRecord train(Model& model, const std::vector<SemiSyntheticPair>& train_pairs,
                  const std::vector<SemiSyntheticPair>& val_pairs, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

// Validation MSE of the model in evaluation mode.
double evaluate_loss(Model& model, const std::vector<SemiSyntheticPair>& pairs, std::size_t batch_size = 64);

// Fixed epoch counts of the published protocol.
std::size_t default_epochs(Architecture arch, ArtifactType artifact);

// Columns epoch,train_loss,val_loss; one row per epoch.
void write_loss_csv(const std::filesystem::path& path, const TrainRecord& rec);
TrainRecord read_loss_csv(const std::filesystem::path& path);

}  // namespace eegbench
