#pragma once

#include <cstdint>
#include <random>

#include "akd/tensor.hpp"

namespace akd {

/// Mixes a base seed with stream indices into an independent seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

/// Seeded source of standard complex Gaussian tensors: real and imaginary
/// parts independent with unit variance each.
class NoiseSource {
public:
  explicit NoiseSource(std::uint64_t seed);

  /// Test hook: every draw is exactly zero.
  static NoiseSource silent();

  KSpaceTensor complex_normal(Dims d);
  double uniform01();
  std::uint64_t seed() const { return seed_; }
  bool silent_mode() const { return silent_; }

private:
  NoiseSource(std::uint64_t seed, bool silent);

  std::uint64_t seed_;
  bool silent_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

} // namespace akd
