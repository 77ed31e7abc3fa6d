#pragma once

#include <vector>

#include <Eigen/Core>

#include "akd/tensor.hpp"

namespace akd {

/// Image-domain coil maps normalized so that sum_c |s_c(p)|^2 = 1 at every
/// pixel (S*S = I). SS* is then an orthogonal projection, and so is its
/// k-space conjugate S̄S̄* = F S S* F^-1.
class CoilSensitivities {
public:
  static constexpr double kNormTolerance = 1e-10;

  /// Takes maps that are already normalized; throws InvalidArgument otherwise.
  explicit CoilSensitivities(ImageTensor maps);

  /// Rescales each pixel onto the unit sphere. Pixels where every coil
  /// vanishes get equal weight 1/sqrt(nc) on all coils.
  static CoilSensitivities normalize(ImageTensor raw);

  /// Spatially constant maps. With constant maps S̄ = S, so the k-space
  /// operators reduce to per-frequency coil mixing.
  static CoilSensitivities uniform(std::vector<Cx> const &weights, Index ky, Index kx);

  ImageTensor const &maps() const { return maps_; }
  Index nc() const { return maps_.nc(); }
  Index ky() const { return maps_.ky(); }
  Index kx() const { return maps_.kx(); }
  bool spatially_uniform() const { return uniform_; }

  /// Pixel-averaged outer product, entry (c, d) = mean_p s_c(p) conj(s_d(p)).
  /// This is the coil block on the diagonal of S̄S̄* at every frequency.
  Eigen::MatrixXcd mean_outer() const;

private:
  ImageTensor maps_;
  bool uniform_ = false;
};

/// S*: coil-combines an image (sum_c conj(s_c) x_c) to a single coil.
ImageTensor coil_combine(ImageTensor const &x, CoilSensitivities const &s);
/// S: expands a single-coil image to all coils.
ImageTensor coil_expand(ImageTensor const &v, CoilSensitivities const &s);

/// S̄* = F S* F^-1 on multi-coil k-space; returns single-coil k-space.
KSpaceTensor apply_s_bar_star(KSpaceTensor const &z, CoilSensitivities const &s);
/// S̄ = F S F^-1 on single-coil k-space; returns multi-coil k-space.
KSpaceTensor apply_s_bar(KSpaceTensor const &v, CoilSensitivities const &s);
/// S̄S̄* z, computed as fft2(S (S* ifft2(z))).
KSpaceTensor apply_ss_star(KSpaceTensor const &z, CoilSensitivities const &s);

} // namespace akd
