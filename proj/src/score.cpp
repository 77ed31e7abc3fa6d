#include "akd/score.hpp"

#include <cmath>

#include "akd/forward.hpp"

namespace akd {

namespace {

double noise_variance(DiffusionSchedule const &sched, int i) {
  double const s0 = sched.sigma(0);
  double const si = sched.sigma(i);
  return std::max(0.0, si * si - s0 * s0);
}

} // namespace

KSpaceTensor DeltaOracle::denoise(KSpaceTensor const &z, int) const {
  require(z.dims() == z0_.dims(), ErrorKind::DimensionMismatch, "DeltaOracle: dims differ");
  return z0_;
}

GaussianPriorOracle::GaussianPriorOracle(KSpaceTensor mean, RealGrid variance,
                                         CoilSensitivities sens, DiffusionSchedule sched)
    : mean_(std::move(mean)), variance_(std::move(variance)), sens_(std::move(sens)),
      sched_(std::move(sched)) {
  require(mean_.nc() == 1, ErrorKind::DimensionMismatch, "GaussianPriorOracle: mean must be single-coil");
  require(mean_.ky() == variance_.ky() && mean_.kx() == variance_.kx() &&
              mean_.ky() == sens_.ky() && mean_.kx() == sens_.kx() &&
              mean_.ky() == sched_.ky() && mean_.kx() == sched_.kx(),
          ErrorKind::DimensionMismatch, "GaussianPriorOracle: grids differ");
  for (double v : variance_.span()) {
    require(v >= 0.0 && std::isfinite(v), ErrorKind::InvalidArgument,
            "GaussianPriorOracle: variance must be finite and non-negative");
  }
}

KSpaceTensor GaussianPriorOracle::denoise(KSpaceTensor const &z, int i) const {
  KSpaceTensor u = apply_s_bar_star(z, sens_);
  RealGrid const &g = sched_.ghat(i);
  double const noise = 2.0 * noise_variance(sched_, i);
  for (Index p = 0; p < u.size(); ++p) {
    double const signal = 2.0 * variance_[p];
    double const den = signal * g[p] * g[p] + noise;
    Cx const m = mean_[p];
    u[p] = den > 0.0 ? m + (signal * g[p] / den) * (u[p] - g[p] * m) : m;
  }
  return apply_s_bar(u, sens_);
}

LinearDenoiser::LinearDenoiser(int n_steps, Index ky, Index kx, Cx init)
    : gains_(Dims{static_cast<Index>(n_steps) + 1, ky, kx}) {
  require(n_steps >= 1, ErrorKind::InvalidArgument, "LinearDenoiser: need N >= 1");
  for (auto &v : gains_.span()) v = init;
}

LinearDenoiser::LinearDenoiser(KSpaceTensor gains) : gains_(std::move(gains)) {
  require(gains_.nc() >= 2, ErrorKind::InvalidArgument, "LinearDenoiser: need N >= 1");
  require(all_finite(gains_), ErrorKind::InvalidArgument, "LinearDenoiser: non-finite gains");
}

std::span<Cx> LinearDenoiser::step_gains(int i) {
  require(i >= 0 && i < gains_.nc(), ErrorKind::IndexOutOfRange, "LinearDenoiser: step out of range");
  return gains_.coil(i);
}

std::span<Cx const> LinearDenoiser::step_gains(int i) const {
  require(i >= 0 && i < gains_.nc(), ErrorKind::IndexOutOfRange, "LinearDenoiser: step out of range");
  return gains_.coil(i);
}

KSpaceTensor LinearDenoiser::denoise(KSpaceTensor const &z, int i) const {
  require(z.ky() == gains_.ky() && z.kx() == gains_.kx(), ErrorKind::DimensionMismatch,
          "LinearDenoiser: grid mismatch");
  auto g = step_gains(i);
  KSpaceTensor out = z;
  Index const plane = z.dims().plane();
  for (Index c = 0; c < z.nc(); ++c) {
    auto coil = out.coil(c);
    for (Index p = 0; p < plane; ++p) coil[static_cast<std::size_t>(p)] *= g[static_cast<std::size_t>(p)];
  }
  return out;
}

double loss_weight(DiffusionSchedule const &sched, int i) {
  double const s = sched.sigma(i);
  return s * s;
}

KSpaceTensor score_from_denoiser(KSpaceTensor const &h, KSpaceTensor const &z_i,
                                 CoilSensitivities const &s, DiffusionSchedule const &sched,
                                 int i) {
  double const sigma = sched.sigma(i);
  require(sigma > 0.0, ErrorKind::NumericalFailure, "score_from_denoiser: sigma_i is zero");
  KSpaceTensor residual = multiply(sched.ghat(i), h);
  residual -= z_i;
  KSpaceTensor score = apply_ss_star(residual, s);
  score *= 1.0 / (sigma * sigma);
  return score;
}

double dsm_loss_at(ScoreModel const &model, KSpaceTensor const &z0, KSpaceTensor const &z_i,
                   CoilSensitivities const &s, DiffusionSchedule const &sched, int i) {
  KSpaceTensor r = model.denoise(z_i, i);
  r -= z0;
  return loss_weight(sched, i) * squared_norm(apply_s_bar_star(multiply(sched.ghat(i), std::move(r)), s));
}

double dsm_loss(ScoreModel const &model, KSpaceTensor const &z0, CoilSensitivities const &s,
                DiffusionSchedule const &sched, int i, NoiseSource &rng) {
  require(i >= 1, ErrorKind::IndexOutOfRange, "dsm_loss: need i >= 1");
  KSpaceTensor const z_i = sample_perturbation(z0, s, sched, i, rng);
  return dsm_loss_at(model, z0, z_i, s, sched, i);
}

KSpaceTensor linear_loss_gradient(LinearDenoiser const &model, KSpaceTensor const &z0,
                                  KSpaceTensor const &z_i, CoilSensitivities const &s,
                                  DiffusionSchedule const &sched, int i) {
  RealGrid const &g = sched.ghat(i);
  KSpaceTensor r = model.denoise(z_i, i);
  r -= z0;
  KSpaceTensor const pr = apply_ss_star(multiply(g, std::move(r)), s);
  double const weight = 2.0 * loss_weight(sched, i);
  Index const plane = z_i.dims().plane();
  KSpaceTensor grad(Dims{1, z_i.ky(), z_i.kx()});
  for (Index p = 0; p < plane; ++p) {
    Cx acc{0.0, 0.0};
    for (Index c = 0; c < z_i.nc(); ++c) acc += pr[c * plane + p] * std::conj(z_i[c * plane + p]);
    grad[p] = weight * g[p] * acc;
  }
  return grad;
}

RealGrid linear_loss_curvature(KSpaceTensor const &z_i, CoilSensitivities const &s,
                               DiffusionSchedule const &sched, int i) {
  RealGrid const &g = sched.ghat(i);
  Eigen::MatrixXcd const block = s.mean_outer();
  double const weight = 2.0 * loss_weight(sched, i);
  Index const plane = z_i.dims().plane();
  Index const nc = z_i.nc();
  RealGrid curv(z_i.ky(), z_i.kx());
  for (Index p = 0; p < plane; ++p) {
    Cx acc{0.0, 0.0};
    for (Index c = 0; c < nc; ++c) {
      for (Index d = 0; d < nc; ++d) {
        acc += std::conj(z_i[c * plane + p]) * block(c, d) * z_i[d * plane + p];
      }
    }
    curv[p] = weight * g[p] * g[p] * acc.real();
  }
  return curv;
}

std::uint64_t training_draw_seed(std::uint64_t base, int iteration, std::size_t sample, int step) {
  return derive_seed(base, static_cast<std::uint64_t>(iteration) + 1, sample + 1,
                     static_cast<std::uint64_t>(step));
}

namespace {

constexpr std::uint64_t kMonitorStream = 0x6d6f6e69746f72ULL;

// Loss on a fixed set of draws, one per (sample, step), identical every
// iteration so that the recorded history only moves when the gains do.
double monitor_loss(LinearDenoiser const &model, std::vector<KSpaceTensor> const &set,
                    std::vector<std::vector<KSpaceTensor>> const &draws,
                    CoilSensitivities const &s, DiffusionSchedule const &sched) {
  int const n = sched.n_steps();
  std::vector<double> per(set.size(), 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < set.size(); ++k) {
    double acc = 0.0;
    for (int i = 1; i <= n; ++i) {
      acc += dsm_loss_at(model, set[k], draws[k][static_cast<std::size_t>(i - 1)], s, sched, i);
    }
    per[k] = acc;
  }
  double total = 0.0;
  for (double v : per) total += v;
  return total / static_cast<double>(set.size() * static_cast<std::size_t>(n));
}

} // namespace

TrainState train_linear_denoiser(std::vector<KSpaceTensor> const &training_set,
                                 CoilSensitivities const &s, DiffusionSchedule const &sched,
                                 double lr, int iters, std::uint64_t seed) {
  require(!training_set.empty(), ErrorKind::InvalidArgument, "train: empty training set");
  return train_linear_denoiser(training_set, s, sched, lr, iters, seed,
                               LinearDenoiser(sched.n_steps(), training_set.front().ky(),
                                              training_set.front().kx()));
}

TrainState train_linear_denoiser(std::vector<KSpaceTensor> const &training_set,
                                 CoilSensitivities const &s, DiffusionSchedule const &sched,
                                 double lr, int iters, std::uint64_t seed, LinearDenoiser init) {
  require(!training_set.empty(), ErrorKind::InvalidArgument, "train: empty training set");
  require(lr >= 0.0 && std::isfinite(lr), ErrorKind::InvalidArgument, "train: lr must be >= 0");
  require(iters >= 0, ErrorKind::InvalidArgument, "train: iters must be >= 0");
  require(init.n_steps() == sched.n_steps(), ErrorKind::DimensionMismatch,
          "train: gains and schedule disagree on N");
  for (auto const &z0 : training_set) {
    require(z0.dims() == training_set.front().dims(), ErrorKind::DimensionMismatch,
            "train: training samples differ in shape");
  }
  int const n = sched.n_steps();
  Index const ky = training_set.front().ky();
  Index const kx = training_set.front().kx();
  std::size_t const n_samples = training_set.size();

  std::vector<std::vector<KSpaceTensor>> monitor_draws(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    for (int i = 1; i <= n; ++i) {
      NoiseSource rng(derive_seed(seed, kMonitorStream, k, static_cast<std::uint64_t>(i)));
      monitor_draws[k].push_back(sample_perturbation(training_set[k], s, sched, i, rng));
    }
  }

  TrainState state{std::move(init), 0, {}};
  double const initial_loss = monitor_loss(state.model, training_set, monitor_draws, s, sched);

  std::vector<RealGrid> curvature(static_cast<std::size_t>(n) + 1, RealGrid(ky, kx));
  std::vector<KSpaceTensor> sample_grad(n_samples, KSpaceTensor(Dims{1, ky, kx}));
  std::vector<RealGrid> sample_curv(n_samples, RealGrid(ky, kx));

  for (int t = 0; t < iters; ++t) {
    for (int i = 1; i <= n; ++i) {
#pragma omp parallel for schedule(static)
      for (std::size_t k = 0; k < n_samples; ++k) {
        NoiseSource rng(training_draw_seed(seed, t, k, i));
        KSpaceTensor const z_i = sample_perturbation(training_set[k], s, sched, i, rng);
        sample_grad[k] = linear_loss_gradient(state.model, training_set[k], z_i, s, sched, i);
        sample_curv[k] = linear_loss_curvature(z_i, s, sched, i);
      }
      // fixed-order reduction keeps training bit-reproducible
      auto gains = state.model.step_gains(i);
      RealGrid &curv = curvature[static_cast<std::size_t>(i)];
      for (Index p = 0; p < curv.size(); ++p) {
        Cx grad{0.0, 0.0};
        for (std::size_t k = 0; k < n_samples; ++k) {
          grad += sample_grad[k][p];
          curv[p] += sample_curv[k][p];
        }
        if (curv[p] > 0.0) gains[static_cast<std::size_t>(p)] -= lr * grad / curv[p];
      }
    }
    double const loss = monitor_loss(state.model, training_set, monitor_draws, s, sched);
    if (!std::isfinite(loss) || loss > 10.0 * initial_loss) {
      fail(ErrorKind::StepSize, "train: loss diverged at iteration " + std::to_string(t) +
                                    " (" + std::to_string(loss) + " vs initial " +
                                    std::to_string(initial_loss) + "); reduce lr");
    }
    state.loss_history.push_back(loss);
    state.iterations = t + 1;
  }
  return state;
}

double gradient_check(LinearDenoiser const &model, KSpaceTensor const &z0,
                      CoilSensitivities const &s, DiffusionSchedule const &sched, int i,
                      NoiseSource &rng, Index max_entries, double step) {
  require(i >= 1, ErrorKind::IndexOutOfRange, "gradient_check: need i >= 1");
  require(step > 0.0, ErrorKind::InvalidArgument, "gradient_check: step must be positive");
  KSpaceTensor const z_i = sample_perturbation(z0, s, sched, i, rng);
  KSpaceTensor const analytic = linear_loss_gradient(model, z0, z_i, s, sched, i);
  Index const plane = z0.dims().plane();
  Index const stride = max_entries > 0 ? std::max<Index>(1, plane / max_entries) : 1;

  double max_grad = 0.0;
  for (Index p = 0; p < plane; ++p) max_grad = std::max(max_grad, std::abs(analytic[p]));

  std::vector<Index> entries;
  for (Index p = 0; p < plane; p += stride) entries.push_back(p);
  std::vector<double> diff(entries.size(), 0.0);

#pragma omp parallel for schedule(dynamic)
  for (std::size_t e = 0; e < entries.size(); ++e) {
    Index const p = entries[e];
    LinearDenoiser probe = model;
    auto g = probe.step_gains(i);
    Cx const base = g[static_cast<std::size_t>(p)];
    auto loss_at = [&](Cx value) {
      g[static_cast<std::size_t>(p)] = value;
      return dsm_loss_at(probe, z0, z_i, s, sched, i);
    };
    double const d_re = (loss_at(base + Cx{step, 0.0}) - loss_at(base - Cx{step, 0.0})) / (2.0 * step);
    double const d_im = (loss_at(base + Cx{0.0, step}) - loss_at(base - Cx{0.0, step})) / (2.0 * step);
    diff[e] = std::abs(Cx{d_re, d_im} - analytic[p]);
  }
  double worst = 0.0;
  for (double d : diff) worst = std::max(worst, d);
  if (max_grad == 0.0) return worst;
  return worst / max_grad;
}

} // namespace akd
