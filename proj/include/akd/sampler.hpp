#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "akd/coils.hpp"
#include "akd/mask.hpp"
#include "akd/noise.hpp"
#include "akd/schedule.hpp"
#include "akd/score.hpp"
#include "akd/slr.hpp"
#include "akd/tensor.hpp"

namespace akd {

struct ReconConfig {
  double lambda = 1.0;     ///< weight of the proximity term in the SLR step
  double r = 0.16;         ///< corrector signal-to-noise ratio
  int n_steps = 50;        ///< must match the schedule
  int corrector_steps = 1; ///< M
  std::uint64_t seed = 0;
  int cg_iters = 10;
  double cg_tol = 1e-6;
};

/// Throws InvalidArgument unless N >= 1, M >= 0, r > 0, lambda >= 0.
void validate(ReconConfig const &cfg);

/// Ĝ_N ⊙ y + sigma_N S̄S̄* n.
KSpaceTensor initialize(KSpaceTensor const &y, CoilSensitivities const &s,
                        DiffusionSchedule const &sched, NoiseSource &rng);

/// Reverse step i+1 -> i given the score eps evaluated at (z_next, i+1):
///   z_next - (Ĝ_{i+1} - Ĝ_i) ⊙ z0_corr + (sigma_{i+1}^2 - sigma_i^2) S̄S̄* eps
///          + sqrt(sigma_{i+1}^2 - sigma_i^2) S̄S̄* n
KSpaceTensor predictor_update(KSpaceTensor const &z_next, KSpaceTensor const &z0_corr,
                              KSpaceTensor const &eps, CoilSensitivities const &s,
                              DiffusionSchedule const &sched, int i, NoiseSource &rng);

/// predictor_update with eps taken from model.denoise(z_next, i + 1).
KSpaceTensor predictor_step(KSpaceTensor const &z_next, KSpaceTensor const &z0_corr,
                            ScoreModel const &model, CoilSensitivities const &s,
                            DiffusionSchedule const &sched, int i, NoiseSource &rng);

struct CorrectorResult {
  KSpaceTensor z;
  double eta = 0.0;
  /// The score vanished, so the step was skipped and z returned unchanged.
  bool skipped = false;
};

/// One Langevin step at level i with eta = 2 (r ||n|| / ||g||)^2.
CorrectorResult corrector_step(KSpaceTensor const &z_i, ScoreModel const &model,
                               CoilSensitivities const &s, DiffusionSchedule const &sched, int i,
                               double r, NoiseSource &rng);

struct ReconOptions {
  /// Called with (i, z_i) after every predictor/corrector round, i = N-1 .. 0.
  std::function<void(int, KSpaceTensor const &)> observer;
  /// Keep z_i for every i divisible by 5 (and z_N).
  bool record_trajectory = false;
  /// Replaces the seeded source; NoiseSource::silent() zeroes every draw.
  NoiseSource *noise = nullptr;
};

struct ReconResult {
  KSpaceTensor z;
  std::vector<int> trajectory_steps;
  std::vector<KSpaceTensor> trajectory;
  int skipped_correctors = 0;
};

/// Predictor-corrector sampling of attenuated k-space diffusion. y must be
/// zero off the mask. Errors raised inside a step are rethrown with the step
/// index prefixed to the message.
ReconResult reconstruct_traced(KSpaceTensor const &y, SamplingMask const &mask,
                               CoilSensitivities const &s, AnnihilationFilter const &filter,
                               ScoreModel const &model, DiffusionSchedule const &sched,
                               ReconConfig const &cfg, ReconOptions const &opts = {});

KSpaceTensor reconstruct(KSpaceTensor const &y, SamplingMask const &mask, CoilSensitivities const &s,
                         AnnihilationFilter const &filter, ScoreModel const &model,
                         DiffusionSchedule const &sched, ReconConfig const &cfg);

} // namespace akd
