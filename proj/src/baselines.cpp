#include "akd/baselines.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "akd/fft.hpp"
#include "akd/slr.hpp"

namespace akd {

namespace {

KSpaceTensor forward_op(ImageTensor const &x, SamplingMask const &mask, CoilSensitivities const &s) {
  return mask.apply(fft2(coil_expand(x, s)));
}

ImageTensor adjoint_op(KSpaceTensor const &r, SamplingMask const &mask, CoilSensitivities const &s) {
  return coil_combine(ifft2(mask.apply(r)), s);
}

void check_inputs(KSpaceTensor const &y, SamplingMask const &mask, CoilSensitivities const &s) {
  require(y.nc() == s.nc() && y.ky() == s.ky() && y.kx() == s.kx(), ErrorKind::DimensionMismatch,
          "baseline: data and coil maps differ in shape");
  require(mask.ky() == y.ky() && mask.kx() == y.kx(), ErrorKind::DimensionMismatch,
          "baseline: mask and data grids differ");
}

// Number of (w, w + shift) pairs along the axis and the length of one column.
struct Pairing {
  Index lines;
  Index length;
};

Pairing pairing(KSpaceTensor const &z, Axis axis) {
  return axis == Axis::Ky ? Pairing{z.ky(), z.kx()} : Pairing{z.kx(), z.ky()};
}

Cx sample(KSpaceTensor const &z, Axis axis, Index c, Index w, Index t) {
  return axis == Axis::Ky ? z(c, w, t) : z(c, t, w);
}

Cx &sample(KSpaceTensor &z, Axis axis, Index c, Index w, Index t) {
  return axis == Axis::Ky ? z(c, w, t) : z(c, t, w);
}

// Source and target columns as (nc x pairs) matrices.
void calibration_pairs(KSpaceTensor const &acs, Axis axis, int shift, Eigen::MatrixXcd &src,
                       Eigen::MatrixXcd &dst) {
  require(shift != 0, ErrorKind::InvalidArgument, "grappa: shift must be nonzero");
  auto const [lines, length] = pairing(acs, axis);
  Index const span = lines - std::abs(shift);
  require(span >= 1, ErrorKind::InvalidArgument, "grappa: calibration region too narrow for the shift");
  Index const first = shift > 0 ? 0 : -shift;
  src.resize(acs.nc(), span * length);
  dst.resize(acs.nc(), span * length);
  for (Index k = 0; k < span; ++k) {
    Index const w = first + k;
    for (Index t = 0; t < length; ++t) {
      for (Index c = 0; c < acs.nc(); ++c) {
        src(c, k * length + t) = sample(acs, axis, c, w, t);
        dst(c, k * length + t) = sample(acs, axis, c, w + shift, t);
      }
    }
  }
}

Eigen::VectorXcd column(KSpaceTensor const &z, Axis axis, Index w, Index t) {
  Eigen::VectorXcd v(z.nc());
  for (Index c = 0; c < z.nc(); ++c) v(c) = sample(z, axis, c, w, t);
  return v;
}

bool line_acquired(SamplingMask const &mask, Index y) {
  for (Index x = 0; x < mask.kx(); ++x) {
    if (!mask(y, x)) return false;
  }
  return true;
}

} // namespace

ImageTensor zero_filled(KSpaceTensor const &y, SamplingMask const &mask, CoilSensitivities const &s) {
  check_inputs(y, mask, s);
  return adjoint_op(y, mask, s);
}

ImageTensor tv_divergence(ImageTensor const &x, double eps) {
  require(x.nc() == 1, ErrorKind::DimensionMismatch, "tv_divergence: expects a single-coil image");
  Index const ky = x.ky();
  Index const kx = x.kx();
  ImageTensor u(x.dims());
  ImageTensor v(x.dims());
#pragma omp parallel for
  for (Index r = 0; r < ky; ++r) {
    for (Index c = 0; c < kx; ++c) {
      Cx const gx = x(0, r, (c + 1) % kx) - x(0, r, c);
      Cx const gy = x(0, (r + 1) % ky, c) - x(0, r, c);
      u(0, r, c) = gx / (std::abs(gx) + eps);
      v(0, r, c) = gy / (std::abs(gy) + eps);
    }
  }
  ImageTensor div(x.dims());
#pragma omp parallel for
  for (Index r = 0; r < ky; ++r) {
    for (Index c = 0; c < kx; ++c) {
      div(0, r, c) = u(0, r, c) - u(0, r, (c + kx - 1) % kx) + v(0, r, c) - v(0, (r + ky - 1) % ky, c);
    }
  }
  return div;
}

PmResult pm_flow_traced(KSpaceTensor const &y, SamplingMask const &mask, CoilSensitivities const &s,
                        PmOptions const &opts) {
  check_inputs(y, mask, s);
  require(opts.step > 0.0, ErrorKind::InvalidArgument, "pm_flow: step must be > 0");
  require(opts.eps > 0.0, ErrorKind::InvalidArgument, "pm_flow: eps must be > 0");
  require(opts.iters >= 0, ErrorKind::InvalidArgument, "pm_flow: iters must be >= 0");
  require(opts.lambda >= 0.0, ErrorKind::InvalidArgument, "pm_flow: lambda must be >= 0");

  PmResult out{adjoint_op(y, mask, s), {}};
  ImageTensor &x = out.x;
  KSpaceTensor residual = forward_op(x, mask, s) - mask.apply(y);
  double const r0 = norm(residual);
  out.residuals.push_back(r0);
  for (int it = 0; it < opts.iters; ++it) {
    ImageTensor update = adjoint_op(residual, mask, s);
    update *= -1.0;
    if (opts.lambda > 0.0) update.axpy(opts.lambda, tv_divergence(x, opts.eps));
    x.axpy(opts.step, update);
    residual = forward_op(x, mask, s) - mask.apply(y);
    double const r = norm(residual);
    out.residuals.push_back(r);
    if (!std::isfinite(r) || (r0 > 0.0 && r > 10.0 * r0)) {
      fail(ErrorKind::StepSize, "pm_flow: data residual grew tenfold at iteration " + std::to_string(it) +
                                    "; reduce the step");
    }
  }
  return out;
}

ImageTensor pm_flow(KSpaceTensor const &y, SamplingMask const &mask, CoilSensitivities const &s,
                    double lambda, double step, int iters, double eps) {
  return pm_flow_traced(y, mask, s, PmOptions{lambda, step, iters, eps}).x;
}

Eigen::MatrixXcd GrappaOperator::generator() const {
  Eigen::MatrixXcd p = K - Eigen::MatrixXcd::Identity(K.rows(), K.cols());
  return p / static_cast<double>(shift);
}

GrappaOperator grappa_operator_fit(KSpaceTensor const &acs, Axis axis, int shift) {
  Eigen::MatrixXcd src;
  Eigen::MatrixXcd dst;
  calibration_pairs(acs, axis, shift, src, dst);
  GrappaOperator op;
  op.axis = axis;
  op.shift = shift;

  // K src = dst in the least-squares sense, solved as src^H K^H = dst^H.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(src.adjoint());
  if (qr.rank() == src.rows()) {
    op.K = qr.solve(dst.adjoint()).adjoint();
  } else {
    Eigen::MatrixXcd normal = src * src.adjoint();
    normal.diagonal().array() += 1e-8;
    op.K = normal.ldlt().solve(src * dst.adjoint()).adjoint();
    op.regularized = true;
  }
  op.residual = (op.K * src - dst).squaredNorm();
  return op;
}

double grappa_residual(KSpaceTensor const &acs, Eigen::MatrixXcd const &K, Axis axis, int shift) {
  Eigen::MatrixXcd src;
  Eigen::MatrixXcd dst;
  calibration_pairs(acs, axis, shift, src, dst);
  require(K.rows() == acs.nc() && K.cols() == acs.nc(), ErrorKind::DimensionMismatch,
          "grappa_residual: operator size differs from coil count");
  return (K * src - dst).squaredNorm();
}

KSpaceTensor grappa_operator_extrapolate(KSpaceTensor const &z_low, GrappaOperator const &op,
                                         Index lo, Index hi, int n_steps) {
  require(op.K.rows() == z_low.nc() && op.K.cols() == z_low.nc(), ErrorKind::DimensionMismatch,
          "grappa_operator_extrapolate: operator size differs from coil count");
  require(n_steps >= 0, ErrorKind::InvalidArgument, "grappa_operator_extrapolate: n_steps must be >= 0");
  auto const [lines, length] = pairing(z_low, op.axis);
  require(lo >= 0 && hi <= lines && lo < hi, ErrorKind::InvalidArgument,
          "grappa_operator_extrapolate: band outside grid");
  KSpaceTensor out = z_low;
  Index const edge = op.shift > 0 ? hi - 1 : lo;
  for (Index t = 0; t < length; ++t) {
    Eigen::VectorXcd cur = column(out, op.axis, edge, t);
    for (int d = 1; d <= n_steps; ++d) {
      Index const w = edge + static_cast<Index>(d) * op.shift;
      if (w < 0 || w >= lines) break;
      cur = op.K * cur;
      for (Index c = 0; c < out.nc(); ++c) sample(out, op.axis, c, w, t) = cur(c);
    }
  }
  return out;
}

ImageTensor grappa_operator_fill(KSpaceTensor const &y, SamplingMask const &mask,
                                 CoilSensitivities const &s) {
  check_inputs(y, mask, s);
  Rect const acs = mask.acs();
  require(!acs.empty() && acs.height() >= 2, ErrorKind::InvalidArgument,
          "grappa-op baseline: mask needs at least two ACS lines");
  KSpaceTensor const calib = extract_region(y, acs);
  GrappaOperator const up = grappa_operator_fit(calib, Axis::Ky, 1);
  GrappaOperator const down = grappa_operator_fit(calib, Axis::Ky, -1);

  Index const ky = y.ky();
  std::vector<bool> have(static_cast<std::size_t>(ky));
  for (Index l = 0; l < ky; ++l) have[static_cast<std::size_t>(l)] = line_acquired(mask, l);

  KSpaceTensor filled = mask.apply(y);
  for (Index l = 0; l < ky; ++l) {
    if (have[static_cast<std::size_t>(l)]) continue;
    // Nearest acquired line; ties go to the one below (source index smaller).
    Index best = -1;
    for (Index d = 1; d < ky && best < 0; ++d) {
      if (l - d >= 0 && have[static_cast<std::size_t>(l - d)]) best = l - d;
      else if (l + d < ky && have[static_cast<std::size_t>(l + d)]) best = l + d;
    }
    if (best < 0) continue;
    Eigen::MatrixXcd const &K = best < l ? up.K : down.K;
    Index const steps = std::abs(l - best);
    Eigen::MatrixXcd power = Eigen::MatrixXcd::Identity(y.nc(), y.nc());
    for (Index k = 0; k < steps; ++k) power = K * power;
    for (Index x = 0; x < y.kx(); ++x) {
      Eigen::VectorXcd const v = power * column(y, Axis::Ky, best, x);
      for (Index c = 0; c < y.nc(); ++c) filled(c, l, x) = v(c);
    }
  }
  return coil_combine(ifft2(filled), s);
}

} // namespace akd
