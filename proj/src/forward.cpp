#include "akd/forward.hpp"

#include <cmath>

#include "akd/fft.hpp"

namespace akd {

KSpaceTensor attenuate(KSpaceTensor const &z0, DiffusionSchedule const &sched, int i) {
  return multiply(sched.ghat(i), z0);
}

KSpaceTensor attenuate_tau(KSpaceTensor const &z0, double tau) {
  return multiply(gaussian_mask(tau, z0.ky(), z0.kx()), z0);
}

KSpaceTensor sample_perturbation(KSpaceTensor const &z0, CoilSensitivities const &s,
                                 DiffusionSchedule const &sched, int i, NoiseSource &rng) {
  KSpaceTensor out = attenuate(z0, sched, i);
  double const s0 = sched.sigma(0);
  double const si = sched.sigma(i);
  double const amplitude = std::sqrt(std::max(0.0, si * si - s0 * s0));
  if (i == 0 || amplitude == 0.0) return out;
  out.axpy(amplitude, apply_ss_star(rng.complex_normal(z0.dims()), s));
  return out;
}

double HeatResidual::relative() const {
  if (numerator == 0.0) return 0.0;
  return numerator / denominator;
}

HeatResidual heat_residual(KSpaceTensor const &z0, DiffusionSchedule const &sched, int i,
                           double dtau) {
  if (i <= 0 || i >= sched.n_steps()) {
    fail(ErrorKind::IndexOutOfRange, "heat_residual: need 0 < i < N");
  }
  require(dtau > 0.0 && std::isfinite(dtau), ErrorKind::InvalidArgument,
          "heat_residual: dtau must be positive");
  double const tau = sched.tau(i);
  KSpaceTensor const plus = attenuate_tau(z0, tau + dtau);
  KSpaceTensor const minus = attenuate_tau(z0, tau - dtau);
  KSpaceTensor const here = attenuate(z0, sched, i);
  RealGrid const r2 = frequency_radius2(z0.ky(), z0.kx());
  KSpaceTensor const laplacian = -1.0 * multiply(r2, here);

  HeatResidual res;
  double num = 0.0;
  double den = 0.0;
  for (Index k = 0; k < z0.size(); ++k) {
    Cx const fd = (plus[k] - minus[k]) / (2.0 * dtau);
    num += std::norm(fd - laplacian[k]);
    den += std::norm(laplacian[k]);
  }
  res.numerator = std::sqrt(num);
  res.denominator = std::sqrt(den);
  return res;
}

ImageTensor circular_convolve(ImageTensor const &z, ImageTensor const &kernel) {
  require(kernel.nc() == 1 && kernel.ky() == z.ky() && kernel.kx() == z.kx(),
          ErrorKind::DimensionMismatch, "circular_convolve: kernel must be one coil on the same grid");
  Index const ky = z.ky();
  Index const kx = z.kx();
  Index const cy = ky / 2;
  Index const cx = kx / 2;
  ImageTensor out(z.dims());
  for (Index c = 0; c < z.nc(); ++c) {
#pragma omp parallel for schedule(static)
    for (Index py = 0; py < ky; ++py) {
      for (Index px = 0; px < kx; ++px) {
        Cx acc{0.0, 0.0};
        for (Index qy = 0; qy < ky; ++qy) {
          Index const sy = ((py + cy - qy) % ky + ky) % ky;
          for (Index qx = 0; qx < kx; ++qx) {
            Index const sx = ((px + cx - qx) % kx + kx) % kx;
            acc += kernel(0, qy, qx) * z(c, sy, sx);
          }
        }
        out(c, py, px) = acc;
      }
    }
  }
  return out;
}

double convolution_equivalence(ImageTensor const &z, DiffusionSchedule const &sched, int i) {
  RealGrid const &g = sched.ghat(i);
  ImageTensor const spectral = ifft2(multiply(g, fft2(z)));

  KSpaceTensor mask(Dims{1, z.ky(), z.kx()});
  for (Index p = 0; p < g.size(); ++p) mask[p] = Cx{g[p], 0.0};
  ImageTensor const kernel = ifft2(mask);
  ImageTensor spatial = circular_convolve(z, kernel);
  spatial *= 1.0 / std::sqrt(static_cast<double>(z.ky() * z.kx()));

  return relative_error(spatial, spectral);
}

} // namespace akd
