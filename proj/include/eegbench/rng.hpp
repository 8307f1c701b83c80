#pragma once

#include <cstdint>
#include <vector>

namespace eegbench {

// Counter-based generator: the n-th draw of stream (seed, stream) is a SplitMix64
// finalization of seed/stream/counter. The bit stream is part of the reproducibility
// contract and must not change between releases.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept : key_(mix_key(seed, stream)) {}

  std::uint64_t next_u64() noexcept { return finalize(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;
  // Standard normal via Box-Muller; both outputs of a pair are used.
  double normal() noexcept;

  // Independent child stream, e.g. one per repetition or per epoch.
  CounterRng fork(std::uint64_t stream) const noexcept { return CounterRng(key_, stream + 1); }

  std::uint64_t counter() const noexcept { return counter_; }

  static std::uint64_t finalize(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static std::uint64_t mix_key(std::uint64_t seed, std::uint64_t stream) noexcept {
    return finalize(seed ^ finalize(stream + 0x632BE59BD9B4E019ULL));
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> permutation(std::size_t n, CounterRng& rng);

}  // namespace eegbench
