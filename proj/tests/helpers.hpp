#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "akd/coils.hpp"
#include "akd/tensor.hpp"

namespace akd::test {

template <class D = KSpaceDomain> CoilArray<D> random_tensor(Dims d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n;
  CoilArray<D> out(d);
  for (Index i = 0; i < out.size(); ++i) out[i] = Cx{n(gen), n(gen)};
  return out;
}

inline RealGrid random_grid(Index ky, Index kx, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  RealGrid g(ky, kx);
  for (Index i = 0; i < g.size(); ++i) g[i] = u(gen);
  return g;
}

/// Smooth, spatially varying maps normalized per pixel.
inline CoilSensitivities smooth_maps(Index nc, Index ky, Index kx, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ImageTensor raw(Dims{nc, ky, kx});
  for (Index c = 0; c < nc; ++c) {
    double const cy = u(gen) * 0.6, cx = u(gen) * 0.6, ph = u(gen) * std::numbers::pi;
    for (Index y = 0; y < ky; ++y) {
      for (Index x = 0; x < kx; ++x) {
        double const dy = (static_cast<double>(y) / static_cast<double>(ky) - 0.5) - cy;
        double const dx = (static_cast<double>(x) / static_cast<double>(kx) - 0.5) - cx;
        raw(c, y, x) = std::exp(-(dy * dy + dx * dx) * 2.0) * std::polar(1.0, ph + 2.0 * dx);
      }
    }
  }
  return CoilSensitivities::normalize(raw);
}

/// Naive centered unitary 2-D DFT of one plane.
inline std::vector<Cx> naive_dft(std::vector<Cx> const &in, Index ky, Index kx, int sign) {
  std::vector<Cx> out(in.size());
  Index const oy = ky / 2, ox = kx / 2;
  double const scale = 1.0 / std::sqrt(static_cast<double>(ky * kx));
  for (Index u = 0; u < ky; ++u) {
    for (Index v = 0; v < kx; ++v) {
      Cx acc{0.0, 0.0};
      for (Index y = 0; y < ky; ++y) {
        for (Index x = 0; x < kx; ++x) {
          double const ph = 2.0 * std::numbers::pi *
                            (static_cast<double>((u - oy) * (y - oy)) / static_cast<double>(ky) +
                             static_cast<double>((v - ox) * (x - ox)) / static_cast<double>(kx));
          acc += in[static_cast<std::size_t>(y * kx + x)] * std::polar(1.0, sign * ph);
        }
      }
      out[static_cast<std::size_t>(u * kx + v)] = acc * scale;
    }
  }
  return out;
}

inline double rel_diff(Eigen::MatrixXcd const &a, Eigen::MatrixXcd const &b) {
  double const den = b.norm();
  return den > 0.0 ? (a - b).norm() / den : (a - b).norm();
}

inline Eigen::VectorXcd flatten(KSpaceTensor const &z) {
  Eigen::VectorXcd v(z.size());
  for (Index i = 0; i < z.size(); ++i) v(i) = z[i];
  return v;
}

inline KSpaceTensor unflatten(Eigen::VectorXcd const &v, Dims d) {
  KSpaceTensor z(d);
  for (Index i = 0; i < z.size(); ++i) z[i] = v(i);
  return z;
}

} // namespace akd::test
