#include "akd/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "akd/kernels.hpp"

namespace akd {

namespace {

void check_pair(RealGrid const &a, RealGrid const &b) {
  require(a.ky() == b.ky() && a.kx() == b.kx(), ErrorKind::DimensionMismatch,
          "metrics: images differ in shape");
}

double squared_diff(RealGrid const &a, RealGrid const &b) {
  double acc = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    double const d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

std::vector<double> gaussian_window(Index n, double sigma) {
  std::vector<double> w(static_cast<std::size_t>(n));
  double const c = 0.5 * static_cast<double>(n - 1);
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    double const d = static_cast<double>(i) - c;
    w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += w[static_cast<std::size_t>(i)];
  }
  for (auto &v : w) v /= total;
  return w;
}

} // namespace

RealGrid sos_combine(ImageTensor const &x) {
  RealGrid out(x.ky(), x.kx());
  kernels::parallel::sos(x.span(), x.nc(), x.ky() * x.kx(), out.span());
  return out;
}

double nmse(RealGrid const &ref, RealGrid const &test) {
  check_pair(ref, test);
  double energy = 0.0;
  for (Index i = 0; i < ref.size(); ++i) energy += ref[i] * ref[i];
  require(energy > 0.0, ErrorKind::UndefinedReference, "nmse: reference image is all zero");
  return squared_diff(ref, test) / energy;
}

double psnr(RealGrid const &ref, RealGrid const &test) {
  check_pair(ref, test);
  double const mse = squared_diff(ref, test) / static_cast<double>(ref.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  double const peak = ref.max();
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(RealGrid const &ref, RealGrid const &test, SsimParams const &p) {
  double const peak = ref.max();
  return ssim(ref, test, peak > 0.0 ? peak : 1.0, p);
}

double ssim(RealGrid const &ref, RealGrid const &test, double dynamic_range, SsimParams const &p) {
  check_pair(ref, test);
  require(p.window >= 1 && p.sigma > 0.0, ErrorKind::InvalidArgument, "ssim: bad window parameters");
  require(ref.ky() >= p.window && ref.kx() >= p.window, ErrorKind::InvalidDimension,
          "ssim: image smaller than the window");
  require(dynamic_range > 0.0, ErrorKind::InvalidArgument, "ssim: dynamic range must be > 0");

  auto const w = gaussian_window(p.window, p.sigma);
  double const c1 = (p.k1 * dynamic_range) * (p.k1 * dynamic_range);
  double const c2 = (p.k2 * dynamic_range) * (p.k2 * dynamic_range);
  Index const ny = ref.ky() - p.window + 1;
  Index const nx = ref.kx() - p.window + 1;

  double total = 0.0;
#pragma omp parallel for reduction(+ : total)
  for (Index y = 0; y < ny; ++y) {
    for (Index x = 0; x < nx; ++x) {
      double ma = 0.0, mb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
      for (Index dy = 0; dy < p.window; ++dy) {
        for (Index dx = 0; dx < p.window; ++dx) {
          double const g = w[static_cast<std::size_t>(dy)] * w[static_cast<std::size_t>(dx)];
          double const a = ref(y + dy, x + dx);
          double const b = test(y + dy, x + dx);
          ma += g * a;
          mb += g * b;
          saa += g * a * a;
          sbb += g * b * b;
          sab += g * a * b;
        }
      }
      double const va = saa - ma * ma;
      double const vb = sbb - mb * mb;
      double const cov = sab - ma * mb;
      total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
  }
  return total / static_cast<double>(ny * nx);
}

} // namespace akd
