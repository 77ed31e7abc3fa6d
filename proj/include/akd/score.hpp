#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "akd/coils.hpp"
#include "akd/noise.hpp"
#include "akd/schedule.hpp"
#include "akd/tensor.hpp"

namespace akd {

/// Denoiser h(ẑ_i, i) estimating ẑ(0); the score follows from it through the
/// residual parameterization in score_from_denoiser.
class ScoreModel {
public:
  virtual ~ScoreModel() = default;
  virtual KSpaceTensor denoise(KSpaceTensor const &z, int i) const = 0;
};

/// Knows the clean data and always returns it.
class DeltaOracle final : public ScoreModel {
public:
  explicit DeltaOracle(KSpaceTensor z0) : z0_(std::move(z0)) {}
  KSpaceTensor denoise(KSpaceTensor const &z, int i) const override;
  KSpaceTensor const &truth() const { return z0_; }

private:
  KSpaceTensor z0_;
};

/// Posterior mean for data z0 = S̄ x̂ with independent per-frequency
/// Gaussian coefficients x̂(w) ~ CN(mean(w), variance(w) per real part).
/// Exact when the coil maps are spatially uniform; for general maps the
/// coil-combined observation S̄* ẑ_i is treated as Ĝ ⊙ x̂ plus white noise.
class GaussianPriorOracle final : public ScoreModel {
public:
  GaussianPriorOracle(KSpaceTensor mean, RealGrid variance, CoilSensitivities sens,
                      DiffusionSchedule sched);
  KSpaceTensor denoise(KSpaceTensor const &z, int i) const override;

private:
  KSpaceTensor mean_;
  RealGrid variance_;
  CoilSensitivities sens_;
  DiffusionSchedule sched_;
};

/// Per-frequency complex gains, one map per step: h(z, i) = g_i ⊙ z on every
/// coil. Gains are stored as a tensor whose coil slot is the step index.
class LinearDenoiser final : public ScoreModel {
public:
  LinearDenoiser(int n_steps, Index ky, Index kx, Cx init = Cx{0.0, 0.0});
  explicit LinearDenoiser(KSpaceTensor gains);

  KSpaceTensor denoise(KSpaceTensor const &z, int i) const override;

  int n_steps() const { return static_cast<int>(gains_.nc()) - 1; }
  KSpaceTensor const &gains() const { return gains_; }
  std::span<Cx> step_gains(int i);
  std::span<Cx const> step_gains(int i) const;

private:
  KSpaceTensor gains_;
};

/// Loss weight lambda(i) = sigma_i^2.
double loss_weight(DiffusionSchedule const &sched, int i);

/// (1 / sigma_i^2) S̄S̄* (Ĝ_i ⊙ h - z_i). The pseudo-inverse of the projection
/// S̄S̄* is the projection itself. Throws NumericalFailure if sigma_i = 0.
KSpaceTensor score_from_denoiser(KSpaceTensor const &h, KSpaceTensor const &z_i,
                                 CoilSensitivities const &s, DiffusionSchedule const &sched,
                                 int i);

/// lambda(i) ||S̄*(Ĝ_i ⊙ (model(z_i, i) - z0))||^2 at a given noisy sample.
double dsm_loss_at(ScoreModel const &model, KSpaceTensor const &z0, KSpaceTensor const &z_i,
                   CoilSensitivities const &s, DiffusionSchedule const &sched, int i);

/// Same, with z_i drawn from the perturbation kernel. Requires i >= 1.
double dsm_loss(ScoreModel const &model, KSpaceTensor const &z0, CoilSensitivities const &s,
                DiffusionSchedule const &sched, int i, NoiseSource &rng);

/// Gradient of dsm_loss_at with respect to the step-i gains of a linear
/// denoiser, as d/dRe + i d/dIm. Single-coil tensor over the (ky, kx) grid.
KSpaceTensor linear_loss_gradient(LinearDenoiser const &model, KSpaceTensor const &z0,
                                  KSpaceTensor const &z_i, CoilSensitivities const &s,
                                  DiffusionSchedule const &sched, int i);

/// Diagonal of the Hessian of the same loss in the gradient convention above:
/// 2 lambda Ĝ^2 z^H P̄ z per frequency, P̄ the coil block of S̄S̄*. Exact for
/// spatially uniform maps, where the loss is separable across frequencies.
RealGrid linear_loss_curvature(KSpaceTensor const &z_i, CoilSensitivities const &s,
                               DiffusionSchedule const &sched, int i);

struct TrainState {
  LinearDenoiser model;
  int iterations = 0;
  std::vector<double> loss_history;
};

/// Seed of the noise draw for (iteration, sample, step) during training.
std::uint64_t training_draw_seed(std::uint64_t base, int iteration, std::size_t sample, int step);

/// Stochastic training of per-step gains on the denoising score-matching loss.
/// Every iteration draws one fresh perturbation per sample and step, and
/// takes a step along the minibatch gradient scaled by the accumulated
/// diagonal curvature, so that with lr = 1 the gains are the minimizer of the
/// loss over all draws seen so far. Aborts with StepSize if the loss exceeds
/// 10x its initial value.
TrainState train_linear_denoiser(std::vector<KSpaceTensor> const &training_set,
                                 CoilSensitivities const &s, DiffusionSchedule const &sched,
                                 double lr, int iters, std::uint64_t seed);

/// Same, continuing from `init` gains.
TrainState train_linear_denoiser(std::vector<KSpaceTensor> const &training_set,
                                 CoilSensitivities const &s, DiffusionSchedule const &sched,
                                 double lr, int iters, std::uint64_t seed, LinearDenoiser init);

/// Max over checked gains of |analytic - central difference| divided by the
/// largest analytic gradient magnitude. One noise draw is taken from rng and
/// held fixed. `max_entries` > 0 restricts the check to evenly spaced gains.
double gradient_check(LinearDenoiser const &model, KSpaceTensor const &z0,
                      CoilSensitivities const &s, DiffusionSchedule const &sched, int i,
                      NoiseSource &rng, Index max_entries = 0, double step = 1e-6);

} // namespace akd
