#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace subterra {

// mt19937_64 with hand-rolled sampling helpers. std::*_distribution is
// implementation-defined, so all draws go through these to keep results
// identical across compilers and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53 bits.
  double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }

  // Index draw proportional to weights (all >= 0, sum > 0).
  std::size_t categorical(const std::vector<double>& cumulative_weights) {
    double total = cumulative_weights.back();
    double u = next_double() * total;
    std::size_t lo = 0, hi = cumulative_weights.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (cumulative_weights[mid] <= u) lo = mid + 1;
      else hi = mid;
    }
    return lo;
  }

 private:
  std::mt19937_64 engine_;
};

inline std::vector<double> cumulative(const std::vector<double>& weights) {
  std::vector<double> cum(weights.size());
  double run = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0) throw std::invalid_argument("negative weight");
    run += weights[i];
    cum[i] = run;
  }
  if (cum.empty() || cum.back() <= 0) throw std::invalid_argument("weights sum to zero");
  return cum;
}

}  // namespace subterra
