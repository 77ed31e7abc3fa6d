#pragma once

#include <cstdint>

#include "akd/coils.hpp"
#include "akd/tensor.hpp"

namespace akd {

struct Phantom {
  ImageTensor image; ///< single-coil ground truth
  CoilSensitivities sens;

  /// Fully sampled multi-coil k-space F S x.
  KSpaceTensor kspace() const;
};

/// Shepp-Logan ellipses (original intensities) with a smooth multiplicative
/// modulation and a mild linear phase ramp, plus nc smooth coil maps built as
/// low-order polynomials times Gaussians centered around the field of view.
/// The seed jitters the coil placement, coil phases and the phase ramp.
Phantom make_phantom(Index ky, Index kx, Index nc, std::uint64_t seed);

} // namespace akd
