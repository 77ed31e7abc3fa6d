#pragma once

#include "akd/tensor.hpp"

namespace akd {

/// Orthonormal 2-D DFT of every coil. Both domains keep their origin at the
/// array center, (floor(ky/2), floor(kx/2)).
KSpaceTensor fft2(ImageTensor const &img);

/// Exact inverse of fft2.
ImageTensor ifft2(KSpaceTensor const &z);

/// Unnormalized, uncentered in-place DFT of one (ky, kx) plane; `inverse`
/// flips the exponent sign without dividing by ky * kx.
void dft2_inplace(std::span<Cx> plane, Index ky, Index kx, bool inverse);

/// Centered frequency of row y / column x in cycles per sample, in [-0.5, 0.5).
double centered_frequency(Index i, Index n);

} // namespace akd
