#ifndef MARRQ_RNG_HPP
#define MARRQ_RNG_HPP

#include <cstdint>
#include <random>

namespace marrq {

// Seeded generator with a fully pinned normal sampler. std::normal_distribution
// is implementation-defined, so toy-network weights and calibration data go
// through an explicit Box-Muller transform to keep golden values stable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal();

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace marrq

#endif
