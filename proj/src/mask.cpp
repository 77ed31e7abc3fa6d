#include "akd/mask.hpp"

#include <algorithm>

#include "akd/noise.hpp"

namespace akd {

SamplingMask::SamplingMask(Index ky, Index kx, std::vector<std::uint8_t> bits, Rect acs)
    : ky_(ky), kx_(kx), bits_(std::move(bits)), acs_(acs) {
  require(ky >= 2 && kx >= 2, ErrorKind::InvalidDimension, "mask: grid too small");
  require(static_cast<Index>(bits_.size()) == ky * kx, ErrorKind::DimensionMismatch,
          "mask: bit count does not match grid");
  for (auto &b : bits_) b = b != 0 ? 1 : 0;
  require(count() > 0, ErrorKind::InvalidArgument, "mask: no acquired samples");
  if (!acs_.empty()) {
    require(acs_.y0 >= 0 && acs_.y1 <= ky && acs_.x0 >= 0 && acs_.x1 <= kx,
            ErrorKind::InvalidArgument, "mask: ACS region outside grid");
    for (Index y = acs_.y0; y < acs_.y1; ++y) {
      for (Index x = acs_.x0; x < acs_.x1; ++x) {
        require((*this)(y, x), ErrorKind::InvalidArgument, "mask: ACS region not fully acquired");
      }
    }
  }
}

SamplingMask SamplingMask::from_bits(Index ky, Index kx, std::vector<std::uint8_t> bits) {
  require(static_cast<Index>(bits.size()) == ky * kx, ErrorKind::DimensionMismatch,
          "mask: bit count does not match grid");
  auto full = [&](Index y) {
    for (Index x = 0; x < kx; ++x) {
      if (bits[static_cast<std::size_t>(y * kx + x)] == 0) return false;
    }
    return true;
  };
  Rect acs;
  Index const center = ky / 2;
  if (full(center)) {
    Index lo = center;
    Index hi = center + 1;
    while (lo > 0 && full(lo - 1)) --lo;
    while (hi < ky && full(hi)) ++hi;
    acs = Rect{lo, hi, 0, kx};
  }
  return SamplingMask(ky, kx, std::move(bits), acs);
}

Index SamplingMask::count() const {
  return static_cast<Index>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<Index> SamplingMask::acquired_lines() const {
  std::vector<Index> lines;
  for (Index y = 0; y < ky_; ++y) {
    for (Index x = 0; x < kx_; ++x) {
      if ((*this)(y, x)) {
        lines.push_back(y);
        break;
      }
    }
  }
  return lines;
}

MaskKind parse_mask_kind(std::string const &name) {
  if (name == "uniform") return MaskKind::Uniform;
  if (name == "random") return MaskKind::Random;
  if (name == "acs-only") return MaskKind::AcsOnly;
  fail(ErrorKind::InvalidArgument, "unknown mask kind '" + name + "'");
}

std::string to_string(MaskKind kind) {
  switch (kind) {
  case MaskKind::Uniform: return "uniform";
  case MaskKind::Random: return "random";
  case MaskKind::AcsOnly: return "acs-only";
  }
  return "uniform";
}

Rect centered_lines(Index lines, Index ky, Index kx) {
  Index const y0 = ky / 2 - lines / 2;
  return Rect{y0, y0 + lines, 0, kx};
}

SamplingMask make_mask(MaskParams const &p) {
  require(p.ky >= 2 && p.kx >= 2, ErrorKind::InvalidDimension, "make_mask: grid too small");
  require(p.R >= 1, ErrorKind::InvalidArgument, "make_mask: R must be >= 1");
  Index const acs_lines = p.kind == MaskKind::AcsOnly ? p.acs_size : p.acs_lines;
  require(acs_lines >= 0 && acs_lines <= p.ky, ErrorKind::InvalidArgument,
          "make_mask: ACS larger than grid");
  require(p.kind != MaskKind::AcsOnly || acs_lines >= 1, ErrorKind::InvalidArgument,
          "make_mask: acs-only mask needs acs_size >= 1");

  std::vector<std::uint8_t> lines(static_cast<std::size_t>(p.ky), 0);
  switch (p.kind) {
  case MaskKind::Uniform:
    for (Index y = 0; y < p.ky; y += p.R) lines[static_cast<std::size_t>(y)] = 1;
    break;
  case MaskKind::Random: {
    NoiseSource rng(p.seed);
    double const rate = 1.0 / static_cast<double>(p.R);
    for (Index y = 0; y < p.ky; ++y) lines[static_cast<std::size_t>(y)] = rng.uniform01() < rate ? 1 : 0;
    break;
  }
  case MaskKind::AcsOnly:
    break;
  }
  Rect const acs = acs_lines > 0 ? centered_lines(acs_lines, p.ky, p.kx) : Rect{};
  for (Index y = acs.y0; y < acs.y1; ++y) lines[static_cast<std::size_t>(y)] = 1;

  std::vector<std::uint8_t> bits(static_cast<std::size_t>(p.ky * p.kx), 0);
  for (Index y = 0; y < p.ky; ++y) {
    if (lines[static_cast<std::size_t>(y)] == 0) continue;
    std::fill_n(bits.begin() + y * p.kx, p.kx, std::uint8_t{1});
  }
  return SamplingMask(p.ky, p.kx, std::move(bits), acs);
}

} // namespace akd
