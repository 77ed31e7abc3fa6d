#include "akd/noise.hpp"

namespace akd {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return splitmix64(h ^ c);
}

NoiseSource::NoiseSource(std::uint64_t seed) : NoiseSource(seed, false) {}

NoiseSource::NoiseSource(std::uint64_t seed, bool silent)
    : seed_(seed), silent_(silent), engine_(seed), normal_(0.0, 1.0), uniform_(0.0, 1.0) {}

NoiseSource NoiseSource::silent() { return NoiseSource(0, true); }

KSpaceTensor NoiseSource::complex_normal(Dims d) {
  KSpaceTensor out(d);
  if (silent_) return out;
  for (auto &v : out.span()) {
    double const re = normal_(engine_);
    double const im = normal_(engine_);
    v = Cx{re, im};
  }
  return out;
}

double NoiseSource::uniform01() { return uniform_(engine_); }

} // namespace akd
