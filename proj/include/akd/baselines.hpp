#pragma once

#include <Eigen/Core>

#include "akd/coils.hpp"
#include "akd/mask.hpp"
#include "akd/tensor.hpp"

namespace akd {

/// S* ifft2(M y): single-coil adjoint reconstruction.
ImageTensor zero_filled(KSpaceTensor const &y, SamplingMask const &mask, CoilSensitivities const &s);

struct PmOptions {
  double lambda = 0.005;
  double step = 0.5;
  int iters = 200;
  double eps = 1e-6;
};

struct PmResult {
  ImageTensor x;
  /// ||A x - y|| before the first step and after each step.
  std::vector<double> residuals;
};

/// Explicit Euler on dx/dt = -A*(A x - y) + lambda div(grad x / (|grad x| + eps)),
/// A = M F S, started from the zero-filled image. Gradient and divergence use
/// forward and backward differences with periodic boundaries, componentwise.
/// Throws StepSize if the data residual exceeds 10x its starting value.
PmResult pm_flow_traced(KSpaceTensor const &y, SamplingMask const &mask, CoilSensitivities const &s,
                        PmOptions const &opts);

ImageTensor pm_flow(KSpaceTensor const &y, SamplingMask const &mask, CoilSensitivities const &s,
                    double lambda, double step, int iters, double eps = 1e-6);

/// Smoothed total-variation drift div(grad x / (|grad x| + eps)) of a single-coil image.
ImageTensor tv_divergence(ImageTensor const &x, double eps);

enum class Axis { Ky, Kx };

/// Coil-mixing operator K with K col(w) ~ col(w + shift) along `axis`, where
/// col(w) stacks the coils of one sample on line (Ky) or column (Kx) w.
struct GrappaOperator {
  Eigen::MatrixXcd K;
  Axis axis = Axis::Ky;
  int shift = 1;
  /// Sum of squared fitting residuals over the calibration pairs.
  double residual = 0.0;
  /// The normal matrix was rank deficient and a ridge of 1e-8 was added.
  bool regularized = false;

  /// (K - I) / shift, the generator of the continuous evolution.
  Eigen::MatrixXcd generator() const;
};

/// Least-squares fit over every (w, w + shift) pair inside `acs`.
GrappaOperator grappa_operator_fit(KSpaceTensor const &acs, Axis axis, int shift);

/// Sum of squared residuals of an arbitrary K on the calibration pairs of `acs`.
double grappa_residual(KSpaceTensor const &acs, Eigen::MatrixXcd const &K, Axis axis, int shift);

/// Fills up to n_steps lines beyond the band [lo, hi) along the operator's
/// axis, in the direction of its shift, by repeated application of K to the
/// last band line. Lines inside the band are left untouched.
KSpaceTensor grappa_operator_extrapolate(KSpaceTensor const &z_low, GrappaOperator const &op,
                                         Index lo, Index hi, int n_steps);

/// Baseline reconstruction: operators for +1 and -1 ky shifts are fitted on
/// the ACS block; every unacquired line is predicted from its nearest
/// acquired line by the matching power of K, then coil-combined.
ImageTensor grappa_operator_fill(KSpaceTensor const &y, SamplingMask const &mask,
                                 CoilSensitivities const &s);

} // namespace akd
