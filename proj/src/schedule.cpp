#include "akd/schedule.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "akd/fft.hpp"

namespace akd {

RealGrid frequency_radius2(Index ky, Index kx) {
  RealGrid r2(ky, kx);
  for (Index y = 0; y < ky; ++y) {
    double const wy = centered_frequency(y, ky);
    for (Index x = 0; x < kx; ++x) {
      double const wx = centered_frequency(x, kx);
      r2(y, x) = wy * wy + wx * wx;
    }
  }
  return r2;
}

RealGrid gaussian_mask(double tau, Index ky, Index kx) {
  RealGrid g = frequency_radius2(ky, kx);
  for (auto &v : g.span()) v = std::exp(-tau * v);
  return g;
}

double default_tau_n(Index acs_lines, Index ky) {
  require(acs_lines >= 1 && ky >= 2, ErrorKind::InvalidArgument,
          "default_tau_n: need acs_lines >= 1 and ky >= 2");
  double const half = static_cast<double>(acs_lines) / (2.0 * static_cast<double>(ky));
  return std::numbers::ln2 / (half * half);
}

DiffusionSchedule::DiffusionSchedule(std::vector<double> tau, std::vector<double> sigma, Index ky,
                                     Index kx)
    : tau_(std::move(tau)), sigma_(std::move(sigma)), ky_(ky), kx_(kx) {
  require(tau_.size() >= 2 && tau_.size() == sigma_.size(), ErrorKind::InvalidSchedule,
          "schedule: need N >= 1 and matching tau/sigma lengths");
  require(ky >= 2 && kx >= 2, ErrorKind::InvalidDimension, "schedule: grid too small");
  require(tau_[0] == 0.0, ErrorKind::InvalidSchedule, "schedule: tau_0 must be 0");
  for (std::size_t i = 0; i < tau_.size(); ++i) {
    require(std::isfinite(tau_[i]) && std::isfinite(sigma_[i]) && sigma_[i] >= 0.0,
            ErrorKind::InvalidSchedule, "schedule: non-finite or negative entry");
    if (i > 0) {
      require(tau_[i] >= tau_[i - 1] && sigma_[i] >= sigma_[i - 1], ErrorKind::InvalidSchedule,
              "schedule: tau and sigma must be non-decreasing");
    }
  }
  ghat_.reserve(tau_.size());
  for (double t : tau_) ghat_.push_back(gaussian_mask(t, ky, kx));
}

void DiffusionSchedule::check_step(int i) const {
  if (i < 0 || i > n_steps()) {
    fail(ErrorKind::IndexOutOfRange,
         "step " + std::to_string(i) + " outside [0, " + std::to_string(n_steps()) + "]");
  }
}

double DiffusionSchedule::tau(int i) const {
  check_step(i);
  return tau_[static_cast<std::size_t>(i)];
}

double DiffusionSchedule::sigma(int i) const {
  check_step(i);
  return sigma_[static_cast<std::size_t>(i)];
}

RealGrid const &DiffusionSchedule::ghat(int i) const {
  check_step(i);
  return ghat_[static_cast<std::size_t>(i)];
}

bool DiffusionSchedule::strictly_monotone() const {
  if (sigma_[0] <= 0.0) return false;
  for (std::size_t i = 1; i < tau_.size(); ++i) {
    if (!(tau_[i] > tau_[i - 1]) || !(sigma_[i] > sigma_[i - 1])) return false;
  }
  return true;
}

DiffusionSchedule build_schedule(int n_steps, double sigma0, double sigma_n, double tau_n,
                                 double gamma, Index ky, Index kx) {
  require(n_steps >= 1, ErrorKind::InvalidSchedule, "build_schedule: N must be >= 1");
  require(sigma0 > 0.0 && sigma0 < sigma_n, ErrorKind::InvalidSchedule,
          "build_schedule: need 0 < sigma0 < sigmaN");
  require(tau_n > 0.0 && std::isfinite(tau_n), ErrorKind::InvalidSchedule,
          "build_schedule: tauN must be positive");
  require(gamma > 0.0 && std::isfinite(gamma), ErrorKind::InvalidSchedule,
          "build_schedule: gamma must be positive");
  std::vector<double> tau(static_cast<std::size_t>(n_steps) + 1);
  std::vector<double> sigma(tau.size());
  double const ratio = sigma_n / sigma0;
  for (int i = 0; i <= n_steps; ++i) {
    double const s = static_cast<double>(i) / static_cast<double>(n_steps);
    tau[static_cast<std::size_t>(i)] = i == 0 ? 0.0 : tau_n * std::pow(s, gamma);
    sigma[static_cast<std::size_t>(i)] = i == n_steps ? sigma_n : sigma0 * std::pow(ratio, s);
  }
  return DiffusionSchedule(std::move(tau), std::move(sigma), ky, kx);
}

} // namespace akd
