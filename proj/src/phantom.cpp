#include "akd/phantom.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "akd/fft.hpp"
#include "akd/noise.hpp"

namespace akd {

namespace {

struct Ellipse {
  double value, a, b, x0, y0, phi_deg;
};

constexpr std::array<Ellipse, 10> kSheppLogan{{
    {2.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0},
    {-0.98, 0.6624, 0.8740, 0.00, -0.0184, 0.0},
    {-0.02, 0.1100, 0.3100, 0.22, 0.0000, -18.0},
    {-0.02, 0.1600, 0.4100, -0.22, 0.0000, 18.0},
    {0.01, 0.2100, 0.2500, 0.00, 0.3500, 0.0},
    {0.01, 0.0460, 0.0460, 0.00, 0.1000, 0.0},
    {0.01, 0.0460, 0.0460, 0.00, -0.1000, 0.0},
    {0.01, 0.0460, 0.0230, -0.08, -0.6050, 0.0},
    {0.01, 0.0230, 0.0230, 0.00, -0.6060, 0.0},
    {0.01, 0.0230, 0.0460, 0.06, -0.6050, 0.0},
}};

double shepp_logan(double u, double v) {
  double value = 0.0;
  for (auto const &e : kSheppLogan) {
    double const phi = e.phi_deg * std::numbers::pi / 180.0;
    double const du = u - e.x0;
    double const dv = v - e.y0;
    double const xr = du * std::cos(phi) + dv * std::sin(phi);
    double const yr = -du * std::sin(phi) + dv * std::cos(phi);
    if ((xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0) value += e.value;
  }
  return value;
}

// Normalized coordinate of pixel i on an axis of n samples, in [-1, 1).
double coord(Index i, Index n) { return (static_cast<double>(i) - 0.5 * static_cast<double>(n)) / (0.5 * static_cast<double>(n)); }

} // namespace

KSpaceTensor Phantom::kspace() const { return fft2(coil_expand(image, sens)); }

Phantom make_phantom(Index ky, Index kx, Index nc, std::uint64_t seed) {
  require(nc >= 1, ErrorKind::InvalidDimension, "make_phantom: nc must be >= 1");
  require(ky >= 2 && kx >= 2, ErrorKind::InvalidDimension, "make_phantom: grid too small");
  NoiseSource rng(seed);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); };

  double const ramp_u = uniform(-0.5, 0.5);
  double const ramp_v = uniform(-0.5, 0.5);
  ImageTensor image(Dims{1, ky, kx});
  constexpr int kSuper = 2;
  double const hu = 1.0 / (0.5 * static_cast<double>(kx));
  double const hv = 1.0 / (0.5 * static_cast<double>(ky));
  for (Index y = 0; y < ky; ++y) {
    for (Index x = 0; x < kx; ++x) {
      double const u = coord(x, kx);
      double const v = coord(y, ky);
      double acc = 0.0;
      for (int sy = 0; sy < kSuper; ++sy) {
        for (int sx = 0; sx < kSuper; ++sx) {
          double const su = u + (sx + 0.5) / kSuper * hu - 0.5 * hu;
          double const sv = v + (sy + 0.5) / kSuper * hv - 0.5 * hv;
          acc += shepp_logan(su, -sv); // the ellipse table has y pointing up
        }
      }
      acc /= kSuper * kSuper;
      double const modulation = 1.0 + 0.05 * std::cos(std::numbers::pi * u) * std::cos(std::numbers::pi * v);
      image(0, y, x) = std::polar(acc * modulation, ramp_u * u + ramp_v * v);
    }
  }

  ImageTensor raw(Dims{nc, ky, kx});
  for (Index c = 0; c < nc; ++c) {
    double const angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(nc) + uniform(-0.2, 0.2);
    double const cu = 1.1 * std::cos(angle);
    double const cv = 1.1 * std::sin(angle);
    double const width = uniform(0.7, 0.9);
    double const a1 = uniform(-0.3, 0.3);
    double const a2 = uniform(-0.3, 0.3);
    double const phase0 = uniform(-std::numbers::pi, std::numbers::pi);
    double const phase_u = uniform(-0.5, 0.5);
    for (Index y = 0; y < ky; ++y) {
      for (Index x = 0; x < kx; ++x) {
        double const u = coord(x, kx);
        double const v = coord(y, ky);
        double const d2 = (u - cu) * (u - cu) + (v - cv) * (v - cv);
        double const magnitude = (1.0 + a1 * u + a2 * v) * std::exp(-d2 / (2.0 * width * width));
        raw(c, y, x) = std::polar(magnitude, phase0 + phase_u * (u + v));
      }
    }
  }
  return Phantom{std::move(image), CoilSensitivities::normalize(std::move(raw))};
}

} // namespace akd
