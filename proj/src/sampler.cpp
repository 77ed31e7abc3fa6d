#include "akd/sampler.hpp"

#include <cmath>
#include <string>

namespace akd {

namespace {

// sqrt(amplitude) S̄S̄* n added in place; a silent source contributes nothing.
void inject_noise(KSpaceTensor &z, double amplitude, CoilSensitivities const &s, NoiseSource &rng) {
  if (amplitude == 0.0 || rng.silent_mode()) return;
  z.axpy(amplitude, apply_ss_star(rng.complex_normal(z.dims()), s));
}

void check_shapes(KSpaceTensor const &z, CoilSensitivities const &s, DiffusionSchedule const &sched) {
  require(z.nc() == s.nc() && z.ky() == s.ky() && z.kx() == s.kx(), ErrorKind::DimensionMismatch,
          "sampler: data and coil maps differ in shape");
  require(z.ky() == sched.ky() && z.kx() == sched.kx(), ErrorKind::DimensionMismatch,
          "sampler: data and schedule grids differ");
}

} // namespace

void validate(ReconConfig const &cfg) {
  require(cfg.n_steps >= 1, ErrorKind::InvalidArgument, "sampler: N must be >= 1");
  require(cfg.corrector_steps >= 0, ErrorKind::InvalidArgument, "sampler: M must be >= 0");
  require(cfg.r > 0.0 && std::isfinite(cfg.r), ErrorKind::InvalidArgument, "sampler: r must be > 0");
  require(cfg.lambda >= 0.0 && std::isfinite(cfg.lambda), ErrorKind::InvalidArgument,
          "sampler: lambda must be >= 0");
  require(cfg.cg_iters >= 0, ErrorKind::InvalidArgument, "sampler: cg_iters must be >= 0");
}

KSpaceTensor initialize(KSpaceTensor const &y, CoilSensitivities const &s,
                        DiffusionSchedule const &sched, NoiseSource &rng) {
  check_shapes(y, s, sched);
  int const n = sched.n_steps();
  KSpaceTensor z = multiply(sched.ghat(n), y);
  inject_noise(z, sched.sigma(n), s, rng);
  return z;
}

KSpaceTensor predictor_update(KSpaceTensor const &z_next, KSpaceTensor const &z0_corr,
                              KSpaceTensor const &eps, CoilSensitivities const &s,
                              DiffusionSchedule const &sched, int i, NoiseSource &rng) {
  require(i >= 0 && i < sched.n_steps(), ErrorKind::IndexOutOfRange, "predictor: need 0 <= i < N");
  require(z0_corr.dims() == z_next.dims() && eps.dims() == z_next.dims(),
          ErrorKind::DimensionMismatch, "predictor: operand shapes differ");
  RealGrid const &g_next = sched.ghat(i + 1);
  RealGrid const &g_cur = sched.ghat(i);
  KSpaceTensor z = z_next;
  Index const plane = z.ky() * z.kx();
  for (Index c = 0; c < z.nc(); ++c) {
    for (Index p = 0; p < plane; ++p) {
      z[c * plane + p] -= (g_next[p] - g_cur[p]) * z0_corr[c * plane + p];
    }
  }
  double const dvar = sched.sigma(i + 1) * sched.sigma(i + 1) - sched.sigma(i) * sched.sigma(i);
  if (dvar != 0.0) z.axpy(dvar, apply_ss_star(eps, s));
  inject_noise(z, std::sqrt(std::max(0.0, dvar)), s, rng);
  return z;
}

KSpaceTensor predictor_step(KSpaceTensor const &z_next, KSpaceTensor const &z0_corr,
                            ScoreModel const &model, CoilSensitivities const &s,
                            DiffusionSchedule const &sched, int i, NoiseSource &rng) {
  require(i >= 0 && i < sched.n_steps(), ErrorKind::IndexOutOfRange, "predictor: need 0 <= i < N");
  KSpaceTensor const h = model.denoise(z_next, i + 1);
  KSpaceTensor const eps = score_from_denoiser(h, z_next, s, sched, i + 1);
  return predictor_update(z_next, z0_corr, eps, s, sched, i, rng);
}

CorrectorResult corrector_step(KSpaceTensor const &z_i, ScoreModel const &model,
                               CoilSensitivities const &s, DiffusionSchedule const &sched, int i,
                               double r, NoiseSource &rng) {
  sched.check_step(i);
  require(r > 0.0, ErrorKind::InvalidArgument, "corrector: r must be > 0");
  KSpaceTensor const g = score_from_denoiser(model.denoise(z_i, i), z_i, s, sched, i);
  KSpaceTensor const n = rng.complex_normal(z_i.dims());
  double const g_norm = norm(g);
  if (g_norm == 0.0) return CorrectorResult{z_i, 0.0, true};

  double const ratio = r * norm(n) / g_norm;
  double const eta = 2.0 * ratio * ratio;
  CorrectorResult out{z_i, eta, false};
  if (eta == 0.0) return out;
  out.z.axpy(eta, apply_ss_star(g, s));
  out.z.axpy(std::sqrt(2.0 * eta), apply_ss_star(n, s));
  return out;
}

ReconResult reconstruct_traced(KSpaceTensor const &y, SamplingMask const &mask,
                               CoilSensitivities const &s, AnnihilationFilter const &filter,
                               ScoreModel const &model, DiffusionSchedule const &sched,
                               ReconConfig const &cfg, ReconOptions const &opts) {
  validate(cfg);
  require(cfg.n_steps == sched.n_steps(), ErrorKind::InvalidSchedule,
          "sampler: config N differs from the schedule length");
  check_shapes(y, s, sched);
  require(mask.ky() == y.ky() && mask.kx() == y.kx(), ErrorKind::DimensionMismatch,
          "sampler: mask and data grids differ");

  NoiseSource seeded(cfg.seed);
  NoiseSource &rng = opts.noise != nullptr ? *opts.noise : seeded;
  SlrOptions const slr{cfg.lambda, cfg.cg_iters, cfg.cg_tol, false};
  int const n = sched.n_steps();
  AnnihilationOperator const annihilate(filter, y.dims());

  ReconResult result{initialize(y, s, sched, rng), {}, {}, 0};
  auto record = [&](int i, KSpaceTensor const &z) {
    if (opts.record_trajectory && (i % 5 == 0 || i == n)) {
      result.trajectory_steps.push_back(i);
      result.trajectory.push_back(z);
    }
  };
  record(n, result.z);

  for (int i = n - 1; i >= 0; --i) {
    try {
      KSpaceTensor const &z_next = result.z;
      // One evaluation of h serves both the SLR input and the predictor score.
      KSpaceTensor const h = model.denoise(z_next, i + 1);
      KSpaceTensor const z0_corr = slr_correct(h, y, mask, annihilate, slr).z;
      KSpaceTensor const eps = score_from_denoiser(h, z_next, s, sched, i + 1);
      KSpaceTensor z = predictor_update(z_next, z0_corr, eps, s, sched, i, rng);
      for (int m = 0; m < cfg.corrector_steps; ++m) {
        CorrectorResult step = corrector_step(z, model, s, sched, i, cfg.r, rng);
        if (step.skipped) ++result.skipped_correctors;
        z = std::move(step.z);
      }
      require(all_finite(z), ErrorKind::NumericalFailure, "non-finite iterate");
      result.z = std::move(z);
    } catch (Error const &e) {
      throw Error(e.kind(), "step " + std::to_string(i) + ": " + e.what());
    }
    if (opts.observer) opts.observer(i, result.z);
    record(i, result.z);
  }
  return result;
}

KSpaceTensor reconstruct(KSpaceTensor const &y, SamplingMask const &mask, CoilSensitivities const &s,
                         AnnihilationFilter const &filter, ScoreModel const &model,
                         DiffusionSchedule const &sched, ReconConfig const &cfg) {
  return reconstruct_traced(y, mask, s, filter, model, sched, cfg).z;
}

} // namespace akd
