#pragma once

#include "akd/coils.hpp"
#include "akd/noise.hpp"
#include "akd/schedule.hpp"
#include "akd/tensor.hpp"

namespace akd {

/// Ĝ_i ⊙ z0, the same mask on every coil.
KSpaceTensor attenuate(KSpaceTensor const &z0, DiffusionSchedule const &sched, int i);

/// exp(-tau |w|^2) ⊙ z0 for an arbitrary exponent.
KSpaceTensor attenuate_tau(KSpaceTensor const &z0, double tau);

/// One draw from the forward perturbation kernel
///   N(Ĝ_i ⊙ z0, (sigma_i^2 - sigma_0^2) S̄S̄*).
/// At i = 0 the noise amplitude is zero and no randomness is consumed.
KSpaceTensor sample_perturbation(KSpaceTensor const &z0, CoilSensitivities const &s,
                                 DiffusionSchedule const &sched, int i, NoiseSource &rng);

struct HeatResidual {
  double numerator = 0.0;   ///< ||central difference + |w|^2 ẑ(tau_i)||
  double denominator = 0.0; ///< ||-|w|^2 ẑ(tau_i)||
  /// numerator / denominator; 0 when the numerator vanishes.
  double relative() const;
};

/// Checks the Fourier-side heat equation d ẑ / d tau = -|w|^2 ẑ at tau_i with
/// a central difference of half-width dtau. Requires 0 < i < N, dtau > 0.
HeatResidual heat_residual(KSpaceTensor const &z0, DiffusionSchedule const &sched, int i,
                           double dtau);

/// Direct circular convolution with the kernel origin at the array center:
///   out_c[p] = sum_q kernel[q] z_c[(p + center - q) mod n]   (per axis).
/// `kernel` is single-coil and shares the plane of z. O(n^2) per coil.
ImageTensor circular_convolve(ImageTensor const &z, ImageTensor const &kernel);

/// Relative difference between ifft2(Ĝ_i ⊙ fft2(z)) and the spatial circular
/// convolution of z with G_i = ifft2(Ĝ_i) (scaled by 1/sqrt(n) for the
/// unitary transform).
double convolution_equivalence(ImageTensor const &z, DiffusionSchedule const &sched, int i);

} // namespace akd
