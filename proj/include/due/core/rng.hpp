#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace due {

// Deterministic random stream. All randomness in a run flows from one root
// seed through named substreams, so adding a consumer never perturbs the
// draws seen by existing ones. Gaussian variates are produced by Box-Muller
// on the raw engine output to keep sequences bit-identical across standard
// library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  // Independent stream derived from this one's seed and a label.
  Rng substream(std::string_view name) const;

  std::uint64_t next_u64();
  double uniform();                  // [0, 1)
  double uniform(double lo, double hi);
  double normal();                   // standard normal
  double normal(double mean, double stddev);
  std::size_t uniform_index(std::size_t n);  // {0, ..., n-1}, n >= 1

  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::swap(v[i], v[uniform_index(i + 1)]);
    }
  }

  std::uint64_t seed() const { return seed_; }

private:
  std::uint64_t seed_;
  std::uint64_t state_[4];   // xoshiro256++
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace due
