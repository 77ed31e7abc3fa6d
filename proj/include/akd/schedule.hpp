#pragma once

#include <vector>

#include "akd/tensor.hpp"

namespace akd {

/// Squared centered frequency radius |w|^2, w in [-0.5, 0.5)^2.
RealGrid frequency_radius2(Index ky, Index kx);

/// exp(-tau |w|^2): the k-space heat kernel at diffusion time tau.
RealGrid gaussian_mask(double tau, Index ky, Index kx);

/// Terminal exponent for which the mask falls to 1/2 at the edge of a
/// centered band of `acs_lines` phase-encode lines.
double default_tau_n(Index acs_lines, Index ky);

/// Discrete diffusion time: exponents tau_i, noise levels sigma_i and the
/// materialized masks exp(-tau_i |w|^2), for i = 0..N.
class DiffusionSchedule {
public:
  /// Accepts any non-decreasing sequences with tau_0 = 0 and sigma_i >= 0.
  /// Degenerate schedules (repeated levels, sigma = 0) are allowed here;
  /// build_schedule produces the strictly monotone ones.
  DiffusionSchedule(std::vector<double> tau, std::vector<double> sigma, Index ky, Index kx);

  int n_steps() const { return static_cast<int>(tau_.size()) - 1; }
  Index ky() const { return ky_; }
  Index kx() const { return kx_; }
  double tau(int i) const;
  double sigma(int i) const;
  RealGrid const &ghat(int i) const;
  std::vector<double> const &taus() const { return tau_; }
  std::vector<double> const &sigmas() const { return sigma_; }

  /// Throws IndexOutOfRange unless 0 <= i <= N.
  void check_step(int i) const;
  /// tau strictly increasing and sigma strictly increasing with sigma_0 > 0.
  bool strictly_monotone() const;

private:
  std::vector<double> tau_;
  std::vector<double> sigma_;
  std::vector<RealGrid> ghat_;
  Index ky_;
  Index kx_;
};

/// tau_i = tau_n (i/N)^gamma, sigma_i = sigma0 (sigma_n/sigma0)^(i/N).
DiffusionSchedule build_schedule(int n_steps, double sigma0, double sigma_n, double tau_n,
                                 double gamma, Index ky, Index kx);

} // namespace akd
