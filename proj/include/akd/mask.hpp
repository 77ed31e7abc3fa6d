#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "akd/tensor.hpp"

namespace akd {

/// Half-open rectangle [y0, y1) x [x0, x1) on the k-space grid.
struct Rect {
  Index y0 = 0;
  Index y1 = 0;
  Index x0 = 0;
  Index x1 = 0;

  Index height() const { return y1 - y0; }
  Index width() const { return x1 - x0; }
  bool empty() const { return height() <= 0 || width() <= 0; }
  bool contains(Index y, Index x) const { return y >= y0 && y < y1 && x >= x0 && x < x1; }
  bool operator==(Rect const &) const = default;
};

/// Binary (ky, kx) acquisition pattern; 1 = acquired. The ACS rectangle is
/// fully acquired.
class SamplingMask {
public:
  SamplingMask(Index ky, Index kx, std::vector<std::uint8_t> bits, Rect acs);

  /// Rebuilds a mask from raw bits, taking as ACS the widest run of fully
  /// acquired lines that contains the center line (empty if there is none).
  static SamplingMask from_bits(Index ky, Index kx, std::vector<std::uint8_t> bits);

  Index ky() const { return ky_; }
  Index kx() const { return kx_; }
  Rect const &acs() const { return acs_; }
  bool operator()(Index y, Index x) const { return bits_[static_cast<std::size_t>(y * kx_ + x)] != 0; }
  std::vector<std::uint8_t> const &bits() const { return bits_; }
  Index count() const;
  /// Lines (ky index) with at least one acquired sample.
  std::vector<Index> acquired_lines() const;

  /// Zeroes every unacquired sample on every coil.
  template <class D> CoilArray<D> apply(CoilArray<D> z) const {
    require(z.ky() == ky_ && z.kx() == kx_, ErrorKind::DimensionMismatch, "mask: grid mismatch");
    Index const plane = ky_ * kx_;
    for (Index c = 0; c < z.nc(); ++c) {
      for (Index p = 0; p < plane; ++p) {
        if (bits_[static_cast<std::size_t>(p)] == 0) z[c * plane + p] = Cx{0.0, 0.0};
      }
    }
    return z;
  }

private:
  Index ky_;
  Index kx_;
  std::vector<std::uint8_t> bits_;
  Rect acs_;
};

enum class MaskKind { Uniform, Random, AcsOnly };

MaskKind parse_mask_kind(std::string const &name);
std::string to_string(MaskKind kind);

struct MaskParams {
  MaskKind kind = MaskKind::Uniform;
  Index ky = 64;
  Index kx = 64;
  int R = 6;
  Index acs_lines = 16; ///< centered fully sampled lines (uniform / random)
  Index acs_size = 32;  ///< centered fully sampled lines (acs-only)
  std::uint64_t seed = 0;
};

/// uniform: every R-th line (lines with index = 0 mod R) plus the centered
/// ACS lines; random: each line kept with probability 1/R plus ACS;
/// acs-only: only the centered block of acs_size lines. ACS is line based,
/// spanning all kx.
SamplingMask make_mask(MaskParams const &p);

/// Centered block of `lines` phase-encode lines over all columns.
Rect centered_lines(Index lines, Index ky, Index kx);

} // namespace akd
