#include "eegbench/train.hpp"

#include <chrono>
#include <fstream>

#include "eegbench/csv.hpp"
#include "eegbench/rng.hpp"

namespace eegbench {

using ad::Tape;
using ad::Tensor;

void TrainConfig::validate() const {
  if (epochs < 1) throw SpecError("train: epochs must be >= 1");
  if (batch_size < 1) throw SpecError("train: batch_size must be >= 1");
}

namespace {

struct Batch {
  Tensor input;
  Tensor target;
};

// Stacks the listed pairs, each divided by the std of its contaminated segment.
Batch make_batch(const std::vector<SemiSyntheticPair>& pairs, std::span<const std::size_t> idx, std::size_t len) {
  std::vector<double> in(idx.size() * len);
  std::vector<double> tg(idx.size() * len);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& p = pairs[idx[i]];
    if (p.contaminated.size() != len || p.ground_truth.size() != len)
      throw ShapeError("train: pair " + std::to_string(idx[i]) + " has " + std::to_string(p.contaminated.size()) +
                       " samples, model expects " + std::to_string(len));
    const double sigma = population_std(p.contaminated.view());
    if (sigma == 0.0) throw DegenerateSignal("train: pair " + std::to_string(idx[i]) + " has zero variance");
    for (std::size_t t = 0; t < len; ++t) {
      in[i * len + t] = p.contaminated[t] / sigma;
      tg[i * len + t] = p.ground_truth[t] / sigma;
    }
  }
  return {Tensor({idx.size(), len}, std::move(in)), Tensor({idx.size(), len}, std::move(tg))};
}

}  // namespace

double evaluate_loss(Model& model, const std::vector<SemiSyntheticPair>& pairs, std::size_t batch_size) {
  if (pairs.empty()) throw InvalidInput("evaluate_loss: no pairs");
  const std::size_t len = model.spec().input_len;
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  ForwardContext ctx;
  double total = 0;
  for (std::size_t start = 0; start < pairs.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, pairs.size() - start);
    Batch b = make_batch(pairs, std::span(order).subspan(start, n), len);
    Tape tape(false);
    const Tensor pred = model.forward(tape, b.input, ctx);
    total += ad::mse(tape, pred, b.target).item() * static_cast<double>(n);
  }
  return total / static_cast<double>(pairs.size());
}

TrainRecord train(Model& model, const std::vector<SemiSyntheticPair>& train_pairs,
                  const std::vector<SemiSyntheticPair>& val_pairs, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_pairs.empty()) throw InvalidInput("train: training set is empty");
  if (val_pairs.empty()) throw InvalidInput("train: validation set is empty");
  const std::size_t len = model.spec().input_len;
  const std::size_t n = train_pairs.size();

  CounterRng root(cfg.seed, 0x7A1);
  AdamState adam(cfg.adam);
  std::vector<Tensor> params = model.parameters();
  TrainRecord rec;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    CounterRng shuffle_rng = root.fork(2 * epoch);
    CounterRng dropout_rng = root.fork(2 * epoch + 1);
    std::vector<std::size_t> order;
    if (cfg.shuffle) {
      order = permutation(n, shuffle_rng);
    } else {
      order.resize(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
    }
    ForwardContext ctx{true, &dropout_rng};
    double total = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t bs = std::min(cfg.batch_size, n - start);
      Batch b = make_batch(train_pairs, std::span(order).subspan(start, bs), len);
      Tape tape;
      const Tensor loss = ad::mse(tape, model.forward(tape, b.input, ctx), b.target);
      tape.backward(loss);
      adam.step(params);
      total += loss.item() * static_cast<double>(bs);
    }
    rec.train_loss.push_back(total / static_cast<double>(n));
    rec.val_loss.push_back(evaluate_loss(model, val_pairs, cfg.batch_size));
    rec.wall_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (on_epoch) on_epoch(epoch + 1, rec.train_loss.back(), rec.val_loss.back());
  }
  return rec;
}

std::size_t default_epochs(Architecture arch, ArtifactType artifact) {
  switch (arch) {
    case Architecture::FCNN: return 60;
    case Architecture::RNN: return artifact == ArtifactType::ocular ? 100 : 60;
    case Architecture::SimpleCNN:
    case Architecture::ComplexCNN: return artifact == ArtifactType::ocular ? 40 : 10;
  }
  return 1;
}

void write_loss_csv(const std::filesystem::path& path, const TrainRecord& rec) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < rec.epochs(); ++e)
    out << e + 1 << ',' << format_real(rec.train_loss[e]) << ',' << format_real(rec.val_loss[e]) << '\n';
}

TrainRecord read_loss_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const std::size_t ct = t.column("train_loss"), cv = t.column("val_loss");
  TrainRecord rec;
  for (const auto& row : t.rows) {
    rec.train_loss.push_back(parse_real(row[ct], path));
    rec.val_loss.push_back(parse_real(row[cv], path));
  }
  return rec;
}

}  // namespace eegbench
