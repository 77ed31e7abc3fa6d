// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Every criterion is timed against its own budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "akd/baselines.hpp"
#include "akd/config.hpp"
#include "akd/container.hpp"
#include "akd/fft.hpp"
#include "akd/forward.hpp"
#include "akd/metrics.hpp"
#include "akd/phantom.hpp"
#include "akd/sampler.hpp"
#include "cli.hpp"
#include "helpers.hpp"

using namespace akd;
using akd::test::random_tensor;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

std::string fmt(char const *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Suite {
  int failures = 0;

  void run(int id, char const *name, double budget_s, std::function<Outcome()> const &body) {
    auto const t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (std::exception const &e) {
      o = Outcome{false, std::string("exception: ") + e.what()};
    }
    double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool const in_time = secs < budget_s;
    bool const pass = o.ok && in_time;
    if (!pass) ++failures;
    std::printf("%s [%2d] %s: %s; %.2f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", id, name,
                o.detail.c_str(), secs, budget_s, in_time ? "" : " OVER TIME");
    std::fflush(stdout);
  }
};

// Shared instance for the end-to-end criteria.
struct PhantomCase {
  Phantom ph = make_phantom(64, 64, 4, 3);
  KSpaceTensor full = ph.kspace();
  RunConfig cfg = parse_run_config(nlohmann::json::object());
};

RealGrid combined_magnitude(KSpaceTensor const &z, CoilSensitivities const &s) {
  return sos_combine(coil_combine(ifft2(z), s));
}

AnnihilationFilter calibrate(KSpaceTensor const &y, SamplingMask const &mask, RunConfig const &cfg) {
  return estimate_annihilation(extract_region(y, mask.acs()), cfg.slr.window, cfg.slr.rank_threshold);
}

// 1 ----------------------------------------------------------------------
Outcome heat_identities() {
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double conv = 0.0, semi = 0.0;
  for (int k = 0; k < 100; ++k) {
    double const tau_n = 1.0 + 499.0 * u(gen);
    auto const sched = build_schedule(10, 0.01, 1.0, tau_n, 2.0, 32, 32);
    int const i = 1 + static_cast<int>(u(gen) * 10.0) % 10;
    auto const x = random_tensor<ImageDomain>(Dims{1, 32, 32}, 1000 + static_cast<std::uint64_t>(k));
    conv = std::max(conv, convolution_equivalence(x, sched, i));

    double const ta = tau_n * u(gen), tb = tau_n * u(gen);
    RealGrid const a = gaussian_mask(ta, 32, 32), b = gaussian_mask(tb, 32, 32), ab = gaussian_mask(ta + tb, 32, 32);
    for (Index p = 0; p < ab.size(); ++p) semi = std::max(semi, std::abs(a[p] * b[p] - ab[p]));
  }
  return {conv <= 1e-10 && semi <= 1e-12, fmt("max convolution gap %.2e (<= 1e-10), max semigroup gap %.2e (<= 1e-12)", conv, semi)};
}

// 2 ----------------------------------------------------------------------
Outcome heat_ode() {
  auto const sched = build_schedule(50, 0.01, 1.0, default_tau_n(8, 32), 2.0, 32, 32);
  auto const z0 = random_tensor(Dims{2, 32, 32}, 102);
  double worst = 0.0, ratio_lo = 1e300, ratio_hi = 0.0;
  for (int i : {10, 25, 40}) {
    double const dtau = 1e-4 * sched.tau(i);
    auto const r1 = heat_residual(z0, sched, i, dtau);
    auto const r2 = heat_residual(z0, sched, i, dtau / 2.0);
    worst = std::max(worst, r1.relative());
    double const ratio = r1.numerator / r2.numerator;
    ratio_lo = std::min(ratio_lo, ratio);
    ratio_hi = std::max(ratio_hi, ratio);
  }
  bool const ok = worst <= 1e-6 && ratio_lo >= 3.5 && ratio_hi <= 4.5;
  return {ok, fmt("max residual %.2e (<= 1e-6), halving ratio in [%.4f, %.4f] (within [3.5, 4.5])", worst, ratio_lo, ratio_hi)};
}

// 3 ----------------------------------------------------------------------
Outcome perturbation_moments() {
  auto const s = akd::test::smooth_maps(2, 32, 32, 103);
  auto const sched = build_schedule(50, 0.01, 1.0, default_tau_n(8, 32), 2.0, 32, 32);
  auto const z0 = random_tensor(Dims{2, 32, 32}, 104);
  int const n = sched.n_steps();
  int const draws = 10000;
  auto const target = attenuate(z0, sched, n);

  // A direction orthogonal to the range of the projection.
  auto const w = random_tensor(Dims{2, 32, 32}, 105);
  auto const v = w - apply_ss_star(w, s);

  KSpaceTensor mean(z0.dims());
  double proj_gap = 0.0, leak = 0.0;
  for (int d = 0; d < draws; ++d) {
    NoiseSource rng(derive_seed(106, static_cast<std::uint64_t>(d)));
    auto const z = sample_perturbation(z0, s, sched, n, rng);
    mean += z;
    if (d < 50) {
      auto const noise = z - target;
      proj_gap = std::max(proj_gap, relative_error(apply_ss_star(noise, s), noise));
    }
    leak = std::max(leak, std::abs(inner(v, z - target)) / (norm(v) * norm(z - target)));
  }
  mean *= 1.0 / draws;
  double const bound = 4.0 * sched.sigma(n) / std::sqrt(static_cast<double>(draws));
  double const dev = max_abs_diff(mean, target);
  bool const ok = dev <= bound && proj_gap <= 1e-10 && leak <= 1e-10;
  return {ok, fmt("max |mean - G_N z0| %.3e (<= %.3e), projection gap %.2e (<= 1e-10), "
                  "off-range correlation %.2e",
                  dev, bound, proj_gap, leak)};
}

// 4 ----------------------------------------------------------------------
Outcome score_consistency() {
  auto const s = akd::test::smooth_maps(2, 32, 32, 107);
  auto const sched = build_schedule(50, 0.01, 1.0, default_tau_n(8, 32), 2.0, 32, 32);
  auto const z0 = random_tensor(Dims{2, 32, 32}, 108);
  DeltaOracle const oracle(z0);
  double max_loss = 0.0, rewrite = 0.0;
  NoiseSource rng(109);
  LinearDenoiser model(sched.n_steps(), 32, 32);
  auto const g = random_tensor(Dims{1, 32, 32}, 110);
  for (int i = 1; i <= sched.n_steps(); ++i) {
    max_loss = std::max(max_loss, dsm_loss(oracle, z0, s, sched, i, rng));
    auto span = model.step_gains(i);
    for (Index p = 0; p < 1024; ++p) span[static_cast<std::size_t>(p)] = g[p];
    auto const zi = sample_perturbation(z0, s, sched, i, rng);
    for (ScoreModel const *m : {static_cast<ScoreModel const *>(&oracle), static_cast<ScoreModel const *>(&model)}) {
      auto const h = m->denoise(zi, i);
      double const lhs = sched.sigma(i) * sched.sigma(i) * norm(apply_ss_star(score_from_denoiser(h, zi, s, sched, i), s));
      auto residual = multiply(sched.ghat(i), h);
      residual -= zi;
      double const rhs = norm(apply_ss_star(residual, s));
      rewrite = std::max(rewrite, std::abs(lhs - rhs) / rhs);
    }
  }
  auto const s64 = akd::test::smooth_maps(2, 64, 64, 111);
  auto const sched64 = build_schedule(50, 0.01, 1.0, default_tau_n(16, 64), 2.0, 64, 64);
  auto const z64 = random_tensor(Dims{2, 64, 64}, 112);
  LinearDenoiser m64(50, 64, 64);
  auto const g64 = random_tensor(Dims{1, 64, 64}, 113);
  double grad = 0.0;
  for (int i : {5, 25, 50}) {
    auto span = m64.step_gains(i);
    for (Index p = 0; p < 4096; ++p) span[static_cast<std::size_t>(p)] = g64[p];
    NoiseSource r(114 + static_cast<std::uint64_t>(i));
    grad = std::max(grad, gradient_check(m64, z64, s64, sched64, i, r, 256));
  }
  bool const ok = max_loss == 0.0 && rewrite <= 1e-12 && grad <= 1e-5;
  return {ok, fmt("oracle loss max %.1e (== 0), rewrite gap %.2e (<= 1e-12), gradient check %.2e (<= 1e-5)",
                  max_loss, rewrite, grad)};
}

// 5 ----------------------------------------------------------------------
Outcome training_oracle() {
  Index const n = 32;
  int const steps = 20, iters = 40;
  std::size_t const samples = 8;
  std::uint64_t const seed = 115;
  auto const s = CoilSensitivities::uniform({Cx{0.6, 0.0}, Cx{0.0, 0.8}}, n, n);
  auto const sched = build_schedule(steps, 0.01, 1.0, default_tau_n(8, n), 2.0, n, n);

  // Gaussian prior: x(w) ~ CN(0, v(w)) with a decaying radial spectrum.
  RealGrid const r2 = frequency_radius2(n, n);
  std::vector<KSpaceTensor> set;
  for (std::size_t k = 0; k < samples; ++k) {
    auto x = random_tensor(Dims{1, n, n}, 200 + k);
    for (Index p = 0; p < n * n; ++p) x[p] *= std::sqrt(1.0 / (1.0 + 200.0 * r2[p]));
    set.push_back(apply_s_bar(x, s));
  }
  auto const st = train_linear_denoiser(set, s, sched, 1.0, iters, seed);

  // Replay every training draw and solve each per-frequency quadratic directly.
  Index const plane = n * n;
  std::vector<Cx> num(static_cast<std::size_t>(plane));
  std::vector<double> den(static_cast<std::size_t>(plane));
  double worst_direct = 0.0, worst_z = 0.0;
  std::vector<std::vector<Cx>> products(static_cast<std::size_t>(plane));
  for (int i = 1; i <= steps; ++i) {
    std::fill(num.begin(), num.end(), Cx{0.0});
    std::fill(den.begin(), den.end(), 0.0);
    std::vector<Cx> cross, power;
    std::vector<double> q(static_cast<std::size_t>(plane), 0.0);
    for (auto &v : products) v.clear();
    std::vector<std::vector<double>> powers(static_cast<std::size_t>(plane));
    for (int t = 0; t < iters; ++t) {
      for (std::size_t k = 0; k < samples; ++k) {
        NoiseSource rng(training_draw_seed(seed, t, k, i));
        auto const u = apply_s_bar_star(sample_perturbation(set[k], s, sched, i, rng), s);
        auto const u0 = apply_s_bar_star(set[k], s);
        for (Index p = 0; p < plane; ++p) {
          auto const sp = static_cast<std::size_t>(p);
          num[sp] += std::conj(u[p]) * u0[p];
          den[sp] += std::norm(u[p]);
          products[sp].push_back(std::conj(u[p]) * u0[p]);
          powers[sp].push_back(std::norm(u[p]));
          if (t == 0) q[sp] += std::norm(u0[p]) / static_cast<double>(samples);
        }
      }
    }
    auto const trained = st.model.step_gains(i);
    double diff = 0.0, ref = 0.0, z2 = 0.0;
    double const var = sched.sigma(i) * sched.sigma(i) - sched.sigma(0) * sched.sigma(0);
    for (Index p = 0; p < plane; ++p) {
      auto const sp = static_cast<std::size_t>(p);
      Cx const direct = num[sp] / den[sp];
      diff += std::norm(trained[sp] - direct);
      ref += std::norm(direct);
      // Population optimum for this training set, and the Monte-Carlo
      // standard error of the ratio estimator around it.
      double const g = sched.ghat(i)[p];
      double const pop = g * q[sp] / (g * g * q[sp] + 2.0 * var);
      double const m = static_cast<double>(products[sp].size());
      double resid = 0.0;
      for (std::size_t j = 0; j < products[sp].size(); ++j) resid += std::norm(products[sp][j] - pop * powers[sp][j]);
      double const se = std::sqrt(resid / m) / (den[sp] / m) / std::sqrt(m);
      z2 += std::norm(trained[sp] - pop) / (se * se);
    }
    worst_direct = std::max(worst_direct, std::sqrt(diff / ref));
    worst_z = std::max(worst_z, std::sqrt(z2 / static_cast<double>(plane)));
  }

  // Trend of the monitored loss over consecutive 10-iteration windows.
  auto const &h = st.loss_history;
  bool monotone = h.size() == static_cast<std::size_t>(iters);
  double worst_rise = -1e300;
  for (std::size_t w = 10; w + 10 <= h.size(); w += 10) {
    auto stats = [&](std::size_t lo) {
      double m = 0.0, v = 0.0;
      for (std::size_t j = lo; j < lo + 10; ++j) m += h[j] / 10.0;
      for (std::size_t j = lo; j < lo + 10; ++j) v += (h[j] - m) * (h[j] - m) / 9.0;
      return std::pair{m, std::sqrt(v / 10.0)};
    };
    auto const [m0, se0] = stats(w - 10);
    auto const [m1, se1] = stats(w);
    double const slack = 3.0 * std::hypot(se0, se1);
    worst_rise = std::max(worst_rise, (m1 - m0) / m0);
    if (m1 > m0 + slack) monotone = false;
  }
  bool const ok = worst_direct <= 1e-3 && monotone && worst_z <= 2.0;
  return {ok, fmt("trained vs direct per-frequency optimum %.2e (<= 1e-3), window trend %s (max rel. change %+.2e), "
                  "population optimum RMS z-score %.2f (<= 2)",
                  worst_direct, monotone ? "non-increasing" : "RISING", worst_rise, worst_z)};
}

// 6 ----------------------------------------------------------------------
KSpaceTensor exponential_field(Index nc, Index ky, Index kx, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-3.14159, 3.14159);
  KSpaceTensor z(Dims{nc, ky, kx});
  for (int t = 0; t < 3; ++t) {
    double const fy = u(gen), fx = u(gen);
    for (Index c = 0; c < nc; ++c) {
      Cx const amp = std::polar(1.0, u(gen));
      for (Index y = 0; y < ky; ++y) {
        for (Index x = 0; x < kx; ++x) z(c, y, x) += amp * std::polar(1.0, fy * static_cast<double>(y) + fx * static_cast<double>(x));
      }
    }
  }
  return z;
}

Outcome slr_machinery() {
  Dims const d{2, 16, 16};
  HankelConfig const w{3, 3};
  auto const z = random_tensor(d, 116);
  Eigen::MatrixXcd y(14 * 14, 18);
  auto const yy = random_tensor(Dims{1, 14 * 14, 18}, 117);
  for (Index r = 0; r < y.rows(); ++r) {
    for (Index c = 0; c < 18; ++c) y(r, c) = yy(0, r, c);
  }
  Cx const lhs = (hankelize(z, w).array().conjugate() * y.array()).sum();
  Cx const rhs = inner(z, hankel_adjoint(y, d, w));
  double const adjoint = std::abs(lhs - rhs) / std::abs(lhs);

  auto const truth = exponential_field(2, 16, 16, 118);
  auto const f = estimate_annihilation(truth, w, 0.05);
  double const annihilation = std::sqrt(annihilation_energy(truth, f)) / norm(truth);

  std::vector<std::uint8_t> bits(256, 0);
  NoiseSource coin(119);
  for (auto &b : bits) b = coin.uniform01() < 0.5 ? 1 : 0;
  SamplingMask const mask(16, 16, bits, Rect{});
  auto const data = mask.apply(truth);
  auto const zp = data + 0.1 * random_tensor(d, 120);
  double const lambda = 1e-3;

  // Dense normal equations of the same quadratic, built column by column.
  Eigen::MatrixXcd const nn = f.filters * f.filters.adjoint();
  Eigen::MatrixXcd a(d.size(), d.size());
  for (Index j = 0; j < d.size(); ++j) {
    KSpaceTensor e(d);
    e[j] = 1.0;
    auto col = 2.0 * hankel_adjoint(hankelize(e, w) * nn, d, w);
    col.axpy(2.0 * lambda, e);
    col += mask.apply(e);
    a.col(j) = akd::test::flatten(col);
  }
  Eigen::VectorXcd b = akd::test::flatten(data) + 2.0 * lambda * akd::test::flatten(zp);
  Eigen::VectorXcd const direct = a.ldlt().solve(b);

  SlrOptions opts;
  opts.lambda = lambda;
  opts.cg_iters = 2000;
  opts.cg_tol = 1e-14;
  opts.record_objective = true;
  auto const r = slr_correct(zp, data, mask, f, opts);
  double const solve = akd::test::rel_diff(akd::test::flatten(r.z), direct);
  bool monotone = true;
  for (std::size_t k = 1; k < r.objective_trace.size(); ++k) {
    if (r.objective_trace[k] > r.objective_trace[k - 1] * (1.0 + 1e-12)) monotone = false;
  }
  bool const ok = adjoint <= 1e-12 && annihilation <= 1e-10 && solve <= 1e-6 && monotone;
  return {ok, fmt("adjoint gap %.2e (<= 1e-12), annihilation residual %.2e (<= 1e-10), CG vs dense %.2e (<= 1e-6) "
                  "after %d iterations, objective %s",
                  adjoint, annihilation, solve, r.iterations, monotone ? "monotone" : "NOT monotone")};
}

// 7 ----------------------------------------------------------------------
Outcome telescope(PhantomCase const &pc) {
  // Initialization attenuates y, so the chain starts at G_N z0 only when
  // every sample is acquired.
  MaskParams mp = pc.cfg.mask;
  mp.R = 1;
  auto const mask = make_mask(mp);
  auto const sched = pc.cfg.build(64, 64);
  AnnihilationFilter empty;
  empty.nc = 4;
  empty.window = pc.cfg.slr.window;
  empty.filters.resize(4 * pc.cfg.slr.window.wy * pc.cfg.slr.window.wx, 0);
  empty.empty_nullspace = true;
  ReconConfig cfg = pc.cfg.sampler;
  cfg.corrector_steps = 0;
  auto silent = NoiseSource::silent();
  ReconOptions opts;
  opts.noise = &silent;
  double worst = 0.0;
  int seen = 0;
  opts.observer = [&](int i, KSpaceTensor const &z) {
    worst = std::max(worst, max_abs_diff(z, attenuate(pc.full, sched, i)));
    ++seen;
  };
  DeltaOracle const oracle(pc.full);
  auto const res = reconstruct_traced(mask.apply(pc.full), mask, pc.ph.sens, empty, oracle, sched, cfg, opts);
  double const final_gap = max_abs_diff(res.z, pc.full);
  bool const ok = worst <= 1e-12 && seen == sched.n_steps() && final_gap <= 1e-12;
  return {ok, fmt("max |z_i - G_i z0| over %d steps %.2e (<= 1e-12), |z_0 - z0| %.2e", seen, worst, final_gap)};
}

// 8 ----------------------------------------------------------------------
Outcome oracle_reconstruction(PhantomCase const &pc) {
  auto const mask = make_mask(pc.cfg.mask);
  auto const y = mask.apply(pc.full);
  auto const sched = pc.cfg.build(64, 64);
  auto const filter = calibrate(y, mask, pc.cfg);
  DeltaOracle const oracle(pc.full);
  auto const a = reconstruct(y, mask, pc.ph.sens, filter, oracle, sched, pc.cfg.sampler);
  auto const b = reconstruct(y, mask, pc.ph.sens, filter, oracle, sched, pc.cfg.sampler);
  RealGrid const truth = sos_combine(pc.ph.image);
  double const e = nmse(truth, combined_magnitude(a, pc.ph.sens));
  double const zf = nmse(truth, sos_combine(zero_filled(y, mask, pc.ph.sens)));
  bool const same = a == b;
  bool const ok = e < 1e-3 && e <= 0.5 * zf && same && all_finite(a);
  return {ok, fmt("NMSE %.3e (< 1e-3), zero-filled %.3e (ratio %.3f <= 0.5), %lld filters, repeat %s", e, zf, e / zf,
                  static_cast<long long>(filter.count()), same ? "bit-identical" : "DIFFERS")};
}

// 9 ----------------------------------------------------------------------
Outcome super_resolution(PhantomCase const &pc) {
  MaskParams mp = pc.cfg.mask;
  mp.kind = MaskKind::AcsOnly;
  mp.acs_size = 32;
  auto const mask = make_mask(mp);
  auto const y = mask.apply(pc.full);
  auto const sched = pc.cfg.build(64, 64);
  auto const filter = calibrate(y, mask, pc.cfg);
  DeltaOracle const oracle(pc.full);
  auto const z = reconstruct(y, mask, pc.ph.sens, filter, oracle, sched, pc.cfg.sampler);

  auto const truth = fft2(pc.ph.image);
  auto const recon = fft2(coil_combine(ifft2(z), pc.ph.sens));
  auto const zf = fft2(zero_filled(y, mask, pc.ph.sens));
  double e_rec = 0.0, e_zf = 0.0, band = 0.0;
  for (Index yy = 0; yy < 64; ++yy) {
    if (mask.acs().contains(yy, 0)) continue;
    for (Index x = 0; x < 64; ++x) {
      e_rec += std::norm(recon(0, yy, x) - truth(0, yy, x));
      e_zf += std::norm(zf(0, yy, x) - truth(0, yy, x));
      band += std::norm(truth(0, yy, x));
    }
  }
  bool const ok = e_rec < e_zf && all_finite(z);
  return {ok, fmt("out-of-ACS relative error %.3e vs zero-filled %.3e", std::sqrt(e_rec / band), std::sqrt(e_zf / band))};
}

// 10 ---------------------------------------------------------------------
Outcome baseline_sanity(PhantomCase const &pc) {
  MaskParams mp = pc.cfg.mask;
  mp.R = 3;
  auto const mask = make_mask(mp);
  auto const y = mask.apply(pc.full);
  RealGrid const truth = sos_combine(pc.ph.image);
  double const e_pm = nmse(truth, sos_combine(pm_flow(y, mask, pc.ph.sens, 0.005, 0.5, 200)));
  double const e_zf = nmse(truth, sos_combine(zero_filled(y, mask, pc.ph.sens)));

  // Coils as exponentials along ky: z_c(y, x) = a_c(x) rate_c^y.
  std::vector<Cx> const rates{std::polar(0.97, 0.3), std::polar(1.02, -0.9), std::polar(0.99, 2.1)};
  auto const amp = random_tensor(Dims{3, 2, 8}, 121);
  KSpaceTensor z(Dims{3, 32, 8});
  for (Index c = 0; c < 3; ++c) {
    for (Index yy = 0; yy < 32; ++yy) {
      for (Index x = 0; x < 8; ++x) z(c, yy, x) = amp(c, 0, x) * std::pow(rates[static_cast<std::size_t>(c)], static_cast<double>(yy));
    }
  }
  Index const lo = 12, hi = 20;
  KSpaceTensor low(z.dims());
  for (Index c = 0; c < 3; ++c) {
    for (Index yy = lo; yy < hi; ++yy) {
      for (Index x = 0; x < 8; ++x) low(c, yy, x) = z(c, yy, x);
    }
  }
  auto const acs = extract_region(low, Rect{lo, hi, 0, 8});
  auto const up = grappa_operator_fit(acs, Axis::Ky, 1);
  auto const down = grappa_operator_fit(acs, Axis::Ky, -1);
  Eigen::Matrix3cd expected = Eigen::Matrix3cd::Zero();
  for (int c = 0; c < 3; ++c) expected(c, c) = rates[static_cast<std::size_t>(c)];
  double const op_err = (up.K - expected).norm() / expected.norm();
  auto const filled = grappa_operator_extrapolate(grappa_operator_extrapolate(low, up, lo, hi, 12), down, lo, hi, 12);
  double const fill_err = relative_error(filled, z);
  bool const ok = e_pm < e_zf && op_err <= 1e-10 && fill_err <= 1e-10;
  return {ok, fmt("PM NMSE %.3e < zero-filled %.3e at R=3, GRAPPA operator error %.2e and fill error %.2e (<= 1e-10)",
                  e_pm, e_zf, op_err, fill_err)};
}

// 11 ---------------------------------------------------------------------
Outcome metrics_identities(PhantomCase const &pc) {
  RealGrid const ref = sos_combine(pc.ph.image);
  bool const exact = nmse(ref, ref) == 0.0 && ssim(ref, ref) == 1.0 && std::isinf(psnr(ref, ref));
  RealGrid peak(20, 20, 0.0);
  peak(3, 4) = 1.0;
  RealGrid off = peak;
  for (auto &v : off.span()) v += std::sqrt(1e-3);
  double const p = psnr(peak, off);

  RealGrid test = ref;
  auto const n = akd::test::random_grid(64, 64, 122, -0.05, 0.05);
  for (Index i = 0; i < test.size(); ++i) test[i] += n[i];
  double const base = nmse(ref, test);
  double worst = 0.0;
  for (double a : {1e-3, 0.37, 2.0, 1e4}) {
    RealGrid ra = ref, ta = test;
    for (auto &v : ra.span()) v *= a;
    for (auto &v : ta.span()) v *= a;
    worst = std::max(worst, std::abs(nmse(ra, ta) - base) / base);
  }
  bool const ok = exact && std::abs(p - 30.0) <= 1e-9 && worst <= 1e-12;
  return {ok, fmt("identities %s, PSNR spot check %.12f dB (30.0), NMSE scale drift %.2e (<= 1e-12)",
                  exact ? "exact" : "BROKEN", p, worst)};
}

// 12 ---------------------------------------------------------------------
std::string slurp(fs::path const &p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome format_and_cli(PhantomCase const &pc) {
  fs::path const dir = fs::temp_directory_path() / "akd_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  // Containers of every dtype and role: write, read, rewrite.
  auto const mask = make_mask(pc.cfg.mask);
  std::vector<std::pair<std::string, TensorContainer>> items{
      {"kspace", pack(pc.full)},
      {"image", pack(pc.ph.image, Role::Image)},
      {"sens", pack(pc.ph.sens.maps(), Role::Sens)},
      {"real", pack(sos_combine(pc.ph.image))},
      {"gains", pack(LinearDenoiser(3, 64, 64, Cx{0.3, -0.2}).gains(), Role::Gains)},
      {"mask", pack(mask)},
      {"filter", pack(calibrate(mask.apply(pc.full), mask, pc.cfg))},
  };
  bool round_trip = true;
  for (auto const &[name, c] : items) {
    fs::path const p = dir / (name + ".mcks");
    write_container(p, c);
    auto const back = read_container(p);
    fs::path const q = dir / (name + "_copy.mcks");
    write_container(q, back);
    round_trip = round_trip && back == c && slurp(p) == slurp(q);
  }
  // Values survive a float32 trip unchanged once narrowed.
  auto const once = unpack_kspace(items[0].second);
  round_trip = round_trip && encode(pack(once)) == encode(items[0].second);

  auto cli = [](std::vector<std::string> args, std::string &out) {
    args.insert(args.begin(), "akd");
    std::ostringstream o, e;
    int const rc = akd::cli::cli_run(args, o, e);
    out = o.str();
    return rc;
  };
  std::string out1, out2, same, scratch;
  fs::path const ph1 = dir / "ph1", ph2 = dir / "ph2";
  int rc = cli({"phantom", "--ky", "64", "--kx", "64", "--nc", "4", "--seed", "3", "--out", ph1.string()}, scratch);
  rc |= cli({"phantom", "--ky", "64", "--kx", "64", "--nc", "4", "--seed", "3", "--out", ph2.string()}, scratch);
  rc |= cli({"mask", "--kind", "uniform", "--R", "6", "--out", (dir / "m.mcks").string()}, scratch);
  rc |= cli({"baseline", "zero-filled", "--kspace", (ph1 / "kspace.mcks").string(), "--mask", (dir / "m.mcks").string(),
             "--sens", (ph1 / "sens.mcks").string(), "--out", (dir / "zf.mcks").string()},
            scratch);
  std::vector<std::string> const metrics{"metrics", "--ref", (ph1 / "image.mcks").string(), "--test", (dir / "zf.mcks").string()};
  rc |= cli(metrics, out1);
  rc |= cli(metrics, out2);
  rc |= cli({"metrics", "--ref", (ph1 / "image.mcks").string(), "--test", (ph1 / "image.mcks").string()}, same);
  bool const stable = rc == 0 && out1 == out2 && !out1.empty() &&
                      same == "{\"nmse\":0.0,\"psnr_db\":\"inf\",\"ssim\":1.0}\n";
  bool const phantom_files = slurp(ph1 / "kspace.mcks") == slurp(ph2 / "kspace.mcks") &&
                             slurp(ph1 / "sens.mcks") == slurp(ph2 / "sens.mcks");

  // Every seeded generator, twice.
  bool seeded = phantom_files;
  NoiseSource a(7), b(7);
  seeded = seeded && a.complex_normal(Dims{2, 8, 8}) == b.complex_normal(Dims{2, 8, 8}) && a.uniform01() == b.uniform01();
  MaskParams rp = pc.cfg.mask;
  rp.kind = MaskKind::Random;
  rp.seed = 11;
  seeded = seeded && make_mask(rp).bits() == make_mask(rp).bits();
  seeded = seeded && make_phantom(32, 32, 2, 5).image == make_phantom(32, 32, 2, 5).image;
  auto const sched = build_schedule(6, 0.01, 1.0, 40.0, 2.0, 64, 64);
  NoiseSource p1(8), p2(8);
  seeded = seeded && sample_perturbation(pc.full, pc.ph.sens, sched, 6, p1) == sample_perturbation(pc.full, pc.ph.sens, sched, 6, p2);
  NoiseSource i1(9), i2(9);
  seeded = seeded && initialize(pc.full, pc.ph.sens, sched, i1) == initialize(pc.full, pc.ph.sens, sched, i2);
  LinearDenoiser const lin(6, 64, 64, Cx{0.5});
  NoiseSource c1(10), c2(10);
  seeded = seeded && corrector_step(pc.full, lin, pc.ph.sens, sched, 3, 0.16, c1).z ==
                         corrector_step(pc.full, lin, pc.ph.sens, sched, 3, 0.16, c2).z;
  std::vector<KSpaceTensor> set{pc.full};
  seeded = seeded && train_linear_denoiser(set, pc.ph.sens, sched, 1.0, 2, 12).model.gains() ==
                         train_linear_denoiser(set, pc.ph.sens, sched, 1.0, 2, 12).model.gains();

  fs::remove_all(dir);
  bool const ok = round_trip && stable && seeded;
  return {ok, fmt("container round trip %s over 7 dtype/role combinations, metrics JSON %s, seeded generators %s",
                  round_trip ? "bit-identical" : "BROKEN", stable ? "byte-stable" : "UNSTABLE",
                  seeded ? "reproducible" : "NOT reproducible")};
}

} // namespace

int main() {
  Suite suite;
  PhantomCase const pc;
  suite.run(1, "heat/convolution identities", 5, heat_identities);
  suite.run(2, "heat ODE certification", 5, heat_ode);
  suite.run(3, "perturbation kernel moments", 60, perturbation_moments);
  suite.run(4, "score/loss consistency", 30, score_consistency);
  suite.run(5, "training oracle", 120, training_oracle);
  suite.run(6, "SLR machinery", 30, slr_machinery);
  suite.run(7, "exact-inversion telescope", 5, [&] { return telescope(pc); });
  suite.run(8, "end-to-end oracle reconstruction", 60, [&] { return oracle_reconstruction(pc); });
  suite.run(9, "super-resolution mode", 60, [&] { return super_resolution(pc); });
  suite.run(10, "baseline sanity", 60, [&] { return baseline_sanity(pc); });
  suite.run(11, "metrics identities", 5, [&] { return metrics_identities(pc); });
  suite.run(12, "format/CLI", 5, [&] { return format_and_cli(pc); });
  std::printf("%d of 12 criteria failed\n", suite.failures);
  return suite.failures == 0 ? 0 : 1;
}
