#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "akd/baselines.hpp"
#include "akd/config.hpp"
#include "akd/container.hpp"
#include "akd/fft.hpp"
#include "akd/forward.hpp"
#include "akd/metrics.hpp"
#include "akd/phantom.hpp"
#include "akd/png_writer.hpp"
#include "akd/sampler.hpp"
#include "akd/score.hpp"

namespace akd::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

void emit_error(std::ostream &err, std::string_view category, std::string const &message) {
  ojson e;
  e["error"]["category"] = category;
  e["error"]["message"] = message;
  err << e.dump() << '\n';
}

RunConfig load_config(std::string const &path) {
  return path.empty() ? parse_run_config(nlohmann::json::object()) : load_run_config(path);
}

CoilSensitivities load_sens(std::string const &path) {
  TensorContainer const c = read_container(path);
  require(c.role == Role::Sens, ErrorKind::MalformedContainer, "'" + path + "' is not a sens container");
  // float32 storage loses the exact normalization, so restore it on load.
  return CoilSensitivities::normalize(unpack_image(c));
}

KSpaceTensor load_kspace(std::string const &path) {
  TensorContainer const c = read_container(path);
  require(c.role == Role::KSpace, ErrorKind::MalformedContainer, "'" + path + "' is not a kspace container");
  return unpack_kspace(c);
}

SamplingMask load_mask(std::string const &path) { return unpack_mask(read_container(path)); }

void check_grid(KSpaceTensor const &z, CoilSensitivities const &s) {
  require(z.nc() == s.nc() && z.ky() == s.ky() && z.kx() == s.kx(), ErrorKind::DimensionMismatch,
          "k-space and sensitivity containers differ in shape");
}

fs::path with_suffix(fs::path const &base, std::string const &suffix) {
  fs::path p = base;
  p.replace_filename(base.stem().string() + suffix + base.extension().string());
  return p;
}

fs::path png_path(fs::path const &container) {
  fs::path p = container;
  p.replace_extension(".png");
  return p;
}

RealGrid image_magnitude(KSpaceTensor const &z, CoilSensitivities const &s) {
  return sos_combine(coil_combine(ifft2(z), s));
}

void ensure_dir(fs::path const &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), ErrorKind::Io, "cannot create directory '" + dir.string() + "'");
}

ojson sidecar(std::string const &command, std::optional<std::uint64_t> seed) {
  ojson m;
  m["command"] = command;
  if (seed) m["seed"] = *seed;
  else m["seed"] = nullptr;
  return m;
}

RealGrid load_magnitude(std::string const &path, CoilSensitivities const *s) {
  TensorContainer const c = read_container(path);
  if (c.dtype == DType::F32) return unpack_real(c);
  require(c.dtype == DType::C64, ErrorKind::MalformedContainer, "'" + path + "' holds no image data");
  if (c.role == Role::KSpace) {
    KSpaceTensor const z = unpack_kspace(c);
    if (s != nullptr) {
      check_grid(z, *s);
      return image_magnitude(z, *s);
    }
    return sos_combine(ifft2(z));
  }
  return sos_combine(unpack_image(c));
}

int job_limit(int requested) {
  int limit = std::max(1, requested);
  if (char const *env = std::getenv("AKD_THREADS")) {
    char *end = nullptr;
    long const cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) limit = std::min<long>(limit, cap);
  }
  return limit;
}

// Runs task(k) for k in [0, n) on up to `jobs` threads; rethrows the first failure.
void run_parallel(std::size_t n, int jobs, std::function<void(std::size_t)> const &task) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex lock;
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        task(k);
      } catch (...) {
        std::lock_guard<std::mutex> g(lock);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::size_t const threads = std::min<std::size_t>(n, static_cast<std::size_t>(jobs));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto &t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

// Isotropic Gaussian prior: zero mean, variance per real part equal to half
// the radially averaged power of the coil-combined reference spectrum.
GaussianPriorOracle radial_prior(KSpaceTensor const &truth, CoilSensitivities const &s,
                                 DiffusionSchedule const &sched) {
  KSpaceTensor const u = apply_s_bar_star(truth, s);
  RealGrid const r2 = frequency_radius2(u.ky(), u.kx());
  Index const plane = u.ky() * u.kx();
  Index const bins = std::max(u.ky(), u.kx());
  std::vector<double> power(static_cast<std::size_t>(bins + 1), 0.0);
  std::vector<double> count(power.size(), 0.0);
  auto bin_of = [&](Index p) {
    auto const b = static_cast<Index>(std::sqrt(r2[p]) * static_cast<double>(bins));
    return static_cast<std::size_t>(std::min(b, bins));
  };
  for (Index p = 0; p < plane; ++p) {
    power[bin_of(p)] += std::norm(u[p]);
    count[bin_of(p)] += 1.0;
  }
  RealGrid variance(u.ky(), u.kx());
  for (Index p = 0; p < plane; ++p) {
    auto const b = bin_of(p);
    variance[p] = std::max(0.5 * power[b] / count[b], 1e-12);
  }
  return GaussianPriorOracle(KSpaceTensor(Dims{1, u.ky(), u.kx()}), variance, s, sched);
}

// --- subcommands ---------------------------------------------------------

struct PhantomArgs {
  Index ky = 64, kx = 64, nc = 4;
  std::uint64_t seed = 0;
  std::string out;
};

void cmd_phantom(PhantomArgs const &a, std::ostream &out) {
  Phantom const ph = make_phantom(a.ky, a.kx, a.nc, a.seed);
  fs::path const dir(a.out);
  ensure_dir(dir);
  ojson meta = sidecar("phantom", a.seed);
  meta["ky"] = a.ky;
  meta["kx"] = a.kx;
  meta["nc"] = a.nc;
  auto emit = [&](char const *name, TensorContainer const &c) {
    fs::path const p = dir / name;
    write_container(p, c);
    write_sidecar(p, meta);
    out << p.string() << '\n';
  };
  emit("image.mcks", pack(ph.image, Role::Image));
  emit("sens.mcks", pack(ph.sens.maps(), Role::Sens));
  emit("kspace.mcks", pack(ph.kspace(), Role::KSpace));
  write_png(dir / "image.png", sos_combine(ph.image));
}

struct MaskArgs {
  std::string config, kind, out;
  Index ky = 64, kx = 64;
  std::optional<int> R;
  std::optional<Index> acs_lines, acs_size;
  std::optional<std::uint64_t> seed;
};

void cmd_mask(MaskArgs const &a, std::ostream &out) {
  MaskParams p = load_config(a.config).mask;
  p.ky = a.ky;
  p.kx = a.kx;
  if (!a.kind.empty()) p.kind = parse_mask_kind(a.kind);
  if (a.R) p.R = *a.R;
  if (a.acs_lines) p.acs_lines = *a.acs_lines;
  if (a.acs_size) p.acs_size = *a.acs_size;
  if (a.seed) p.seed = *a.seed;
  SamplingMask const m = make_mask(p);
  fs::path const path(a.out);
  write_container(path, pack(m));
  ojson meta = sidecar("mask", p.seed);
  meta["kind"] = to_string(p.kind);
  meta["R"] = p.R;
  meta["acs_lines"] = p.acs_lines;
  meta["acs_size"] = p.acs_size;
  meta["count"] = m.count();
  write_sidecar(path, meta);
  RealGrid img(m.ky(), m.kx());
  for (Index i = 0; i < img.size(); ++i) img[i] = m.bits()[static_cast<std::size_t>(i)];
  write_png(png_path(path), img);
  out << path.string() << '\n';
}

struct ForwardArgs {
  std::string kspace, sens, config, out;
  int every = 10;
  bool perturb = false;
  std::uint64_t seed = 0;
};

void cmd_forward(ForwardArgs const &a, std::ostream &out) {
  require(a.every >= 1, ErrorKind::InvalidArgument, "--every must be >= 1");
  RunConfig const cfg = load_config(a.config);
  KSpaceTensor const z0 = load_kspace(a.kspace);
  CoilSensitivities const s = load_sens(a.sens);
  check_grid(z0, s);
  DiffusionSchedule const sched = cfg.build(z0.ky(), z0.kx());
  fs::path const dir(a.out);
  ensure_dir(dir);
  NoiseSource rng(a.seed);
  int const n = sched.n_steps();
  for (int i = 0; i <= n; ++i) {
    if (i % a.every != 0 && i != n) continue;
    KSpaceTensor const z = a.perturb ? sample_perturbation(z0, s, sched, i, rng) : attenuate(z0, sched, i);
    char name[32];
    std::snprintf(name, sizeof name, "step_%03d.mcks", i);
    fs::path const p = dir / name;
    write_container(p, pack(z));
    ojson meta = sidecar("forward", a.seed);
    meta["step"] = i;
    meta["tau"] = sched.tau(i);
    meta["sigma"] = sched.sigma(i);
    meta["perturb"] = a.perturb;
    write_sidecar(p, meta);
    write_png(png_path(p), image_magnitude(z, s));
    out << p.string() << '\n';
  }
}

struct TrainArgs {
  std::vector<std::string> kspace;
  std::string sens, config, out;
  int iters = 50;
  double lr = 1.0;
  std::uint64_t seed = 0;
};

void cmd_train(TrainArgs const &a, std::ostream &out) {
  RunConfig const cfg = load_config(a.config);
  CoilSensitivities const s = load_sens(a.sens);
  std::vector<KSpaceTensor> set;
  for (auto const &p : a.kspace) {
    set.push_back(load_kspace(p));
    check_grid(set.back(), s);
  }
  DiffusionSchedule const sched = cfg.build(s.ky(), s.kx());
  TrainState const st = train_linear_denoiser(set, s, sched, a.lr, a.iters, a.seed);
  fs::path const path(a.out);
  write_container(path, pack(st.model.gains(), Role::Gains));
  ojson meta = sidecar("train", a.seed);
  meta["iterations"] = st.iterations;
  meta["lr"] = a.lr;
  meta["loss_history"] = st.loss_history;
  write_sidecar(path, meta);
  out << path.string() << '\n';
}

AnnihilationFilter calibrate_filter(KSpaceTensor const &y, SamplingMask const &mask, RunConfig const &cfg) {
  if (mask.acs().empty()) {
    AnnihilationFilter filter;
    filter.window = cfg.slr.window;
    filter.nc = y.nc();
    filter.filters.resize(y.nc() * cfg.slr.window.wy * cfg.slr.window.wx, 0);
    filter.empty_nullspace = true;
    return filter;
  }
  return estimate_annihilation(extract_region(y, mask.acs()), cfg.slr.window, cfg.slr.rank_threshold);
}

struct CalibrateArgs {
  std::string kspace, mask, config, out;
};

void cmd_calibrate(CalibrateArgs const &a, std::ostream &out) {
  RunConfig const cfg = load_config(a.config);
  SamplingMask const mask = load_mask(a.mask);
  KSpaceTensor const full = load_kspace(a.kspace);
  require(mask.ky() == full.ky() && mask.kx() == full.kx(), ErrorKind::DimensionMismatch,
          "mask and k-space grids differ");
  AnnihilationFilter const filter = calibrate_filter(mask.apply(full), mask, cfg);
  fs::path const path(a.out);
  write_container(path, pack(filter));
  ojson meta = sidecar("calibrate", std::nullopt);
  meta["window"] = {cfg.slr.window.wy, cfg.slr.window.wx};
  meta["rank_threshold"] = cfg.slr.rank_threshold;
  meta["filters"] = filter.count();
  meta["empty_nullspace"] = filter.empty_nullspace;
  write_sidecar(path, meta);
  out << path.string() << '\n';
}

struct ReconArgs {
  std::vector<std::string> kspace, truth;
  std::string mask, sens, model = "delta", gains, filter, config, out;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

void cmd_reconstruct(ReconArgs const &a, std::ostream &out) {
  RunConfig cfg = load_config(a.config);
  if (a.seed) cfg.sampler.seed = *a.seed;
  require(a.model == "delta" || a.model == "gaussian" || a.model == "linear", ErrorKind::Usage,
          "--model must be delta, gaussian or linear");
  require(a.truth.empty() || a.truth.size() == a.kspace.size(), ErrorKind::Usage,
          "--truth must be given once per --kspace");
  require(a.model != "linear" || !a.gains.empty(), ErrorKind::Usage, "--model linear needs --gains");

  SamplingMask const mask = load_mask(a.mask);
  CoilSensitivities const s = load_sens(a.sens);
  DiffusionSchedule const sched = cfg.build(s.ky(), s.kx());
  std::optional<LinearDenoiser> linear;
  if (a.model == "linear") {
    TensorContainer const c = read_container(a.gains);
    require(c.role == Role::Gains, ErrorKind::MalformedContainer, "'" + a.gains + "' is not a gains container");
    linear.emplace(unpack_kspace(c));
    require(linear->n_steps() == sched.n_steps(), ErrorKind::DimensionMismatch,
            "gains were trained for a different number of steps");
  }

  std::optional<AnnihilationFilter> fixed;
  if (!a.filter.empty()) {
    TensorContainer const c = read_container(a.filter);
    fixed.emplace(unpack_filter(c));
    require(fixed->nc == s.nc(), ErrorKind::DimensionMismatch, "filter bank was built for a different coil count");
  }

  fs::path const base(a.out);
  std::size_t const n = a.kspace.size();
  std::vector<fs::path> written(n);
  run_parallel(n, job_limit(a.jobs), [&](std::size_t k) {
    KSpaceTensor const full = load_kspace(a.kspace[k]);
    check_grid(full, s);
    KSpaceTensor const truth = a.truth.empty() ? full : load_kspace(a.truth[k]);
    KSpaceTensor const y = mask.apply(full);

    AnnihilationFilter const filter = fixed ? *fixed : calibrate_filter(y, mask, cfg);

    ReconConfig rc = cfg.sampler;
    rc.seed = cfg.sampler.seed + k;
    KSpaceTensor z(y.dims());
    if (a.model == "delta") {
      z = reconstruct(y, mask, s, filter, DeltaOracle(truth), sched, rc);
    } else if (a.model == "gaussian") {
      z = reconstruct(y, mask, s, filter, radial_prior(truth, s, sched), sched, rc);
    } else {
      z = reconstruct(y, mask, s, filter, *linear, sched, rc);
    }

    fs::path const path = n == 1 ? base : with_suffix(base, "_" + std::to_string(k));
    write_container(path, pack(z));
    ojson meta = sidecar("reconstruct", rc.seed);
    meta["model"] = a.model;
    meta["input"] = a.kspace[k];
    meta["config"] = to_json(cfg);
    meta["filters"] = filter.count();
    write_sidecar(path, meta);
    write_png(png_path(path), image_magnitude(z, s));
    written[k] = path;
  });
  for (auto const &p : written) out << p.string() << '\n';
}

struct BaselineArgs {
  std::string method, kspace, mask, sens, out;
  double lambda = 0.005, step = 0.5, eps = 1e-6;
  int iters = 200;
};

void cmd_baseline(BaselineArgs const &a, std::ostream &out) {
  KSpaceTensor const full = load_kspace(a.kspace);
  SamplingMask const mask = load_mask(a.mask);
  CoilSensitivities const s = load_sens(a.sens);
  check_grid(full, s);
  KSpaceTensor const y = mask.apply(full);
  ImageTensor x(Dims{1, y.ky(), y.kx()});
  ojson meta = sidecar("baseline", std::nullopt);
  meta["method"] = a.method;
  if (a.method == "pm") {
    x = pm_flow(y, mask, s, a.lambda, a.step, a.iters, a.eps);
    meta["lambda"] = a.lambda;
    meta["step"] = a.step;
    meta["iters"] = a.iters;
  } else if (a.method == "grappa-op") {
    x = grappa_operator_fill(y, mask, s);
  } else if (a.method == "zero-filled") {
    x = zero_filled(y, mask, s);
  } else {
    fail(ErrorKind::Usage, "baseline method must be pm, grappa-op or zero-filled");
  }
  fs::path const path(a.out);
  write_container(path, pack(x, Role::Image));
  write_sidecar(path, meta);
  write_png(png_path(path), sos_combine(x));
  out << path.string() << '\n';
}

struct MetricsArgs {
  std::string ref, test, sens;
};

void cmd_metrics(MetricsArgs const &a, std::ostream &out) {
  std::optional<CoilSensitivities> s;
  if (!a.sens.empty()) s.emplace(load_sens(a.sens));
  CoilSensitivities const *sp = s ? &*s : nullptr;
  RealGrid const ref = load_magnitude(a.ref, sp);
  RealGrid const test = load_magnitude(a.test, sp);
  double const e = nmse(ref, test);
  double const p = psnr(ref, test);
  double const q = ssim(ref, test);
  out << "{\"nmse\":" << format_real(e) << ",\"psnr_db\":"
      << (std::isinf(p) ? std::string("\"inf\"") : format_real(p)) << ",\"ssim\":" << format_real(q)
      << "}\n";
}

} // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

int cli_run(std::vector<std::string> const &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Attenuated k-space diffusion reconstruction toolkit", args.empty() ? "akd" : args[0]};
  app.require_subcommand(1);

  PhantomArgs ph;
  auto *sp = app.add_subcommand("phantom", "Generate a Shepp-Logan phantom with coil maps");
  sp->add_option("--ky", ph.ky, "Phase-encode lines")->capture_default_str();
  sp->add_option("--kx", ph.kx, "Readout columns")->capture_default_str();
  sp->add_option("--nc", ph.nc, "Coil count")->capture_default_str();
  sp->add_option("--seed", ph.seed, "Generator seed")->capture_default_str();
  sp->add_option("--out", ph.out, "Output directory")->required();

  MaskArgs mk;
  auto *sm = app.add_subcommand("mask", "Generate a sampling mask");
  sm->add_option("--config", mk.config, "Run configuration (mask section)");
  sm->add_option("--kind", mk.kind, "uniform, random or acs-only");
  sm->add_option("--ky", mk.ky)->capture_default_str();
  sm->add_option("--kx", mk.kx)->capture_default_str();
  sm->add_option("--R", mk.R, "Acceleration");
  sm->add_option("--acs-lines", mk.acs_lines, "ACS lines for uniform and random masks");
  sm->add_option("--acs-size", mk.acs_size, "ACS lines for acs-only masks");
  sm->add_option("--seed", mk.seed, "Seed for random masks");
  sm->add_option("--out", mk.out, "Output container")->required();

  ForwardArgs fw;
  auto *sf = app.add_subcommand("forward", "Write the attenuation sequence of a k-space container");
  sf->add_option("--kspace", fw.kspace)->required();
  sf->add_option("--sens", fw.sens)->required();
  sf->add_option("--config", fw.config);
  sf->add_option("--every", fw.every, "Write every n-th step")->capture_default_str();
  sf->add_flag("--perturb", fw.perturb, "Draw from the perturbation kernel instead of pure attenuation");
  sf->add_option("--seed", fw.seed)->capture_default_str();
  sf->add_option("--out", fw.out, "Output directory")->required();

  TrainArgs tr;
  auto *st = app.add_subcommand("train", "Train the per-frequency linear denoiser");
  st->add_option("--kspace", tr.kspace, "Training k-space containers")->required();
  st->add_option("--sens", tr.sens)->required();
  st->add_option("--config", tr.config);
  st->add_option("--iters", tr.iters)->capture_default_str();
  st->add_option("--lr", tr.lr)->capture_default_str();
  st->add_option("--seed", tr.seed)->capture_default_str();
  st->add_option("--out", tr.out, "Output gains container")->required();

  ReconArgs rc;
  auto *sr = app.add_subcommand("reconstruct", "Predictor-corrector reconstruction");
  sr->add_option("--kspace", rc.kspace, "Fully sampled or zero-filled k-space, one per slice")->required();
  sr->add_option("--truth", rc.truth, "Reference k-space for the oracle models (defaults to --kspace)");
  sr->add_option("--mask", rc.mask)->required();
  sr->add_option("--sens", rc.sens)->required();
  sr->add_option("--model", rc.model, "delta, gaussian or linear")->capture_default_str();
  sr->add_option("--gains", rc.gains, "Gains container for --model linear");
  sr->add_option("--filter", rc.filter, "Filter bank from 'calibrate' (default: estimated from the ACS)");
  sr->add_option("--config", rc.config);
  sr->add_option("--seed", rc.seed, "Overrides sampler.seed");
  sr->add_option("--jobs", rc.jobs, "Slices reconstructed concurrently (capped by AKD_THREADS)")
      ->capture_default_str();
  sr->add_option("--out", rc.out, "Output container")->required();

  BaselineArgs bl;
  CalibrateArgs ca;
  auto *sc = app.add_subcommand("calibrate", "Estimate the annihilation filter bank from the ACS region");
  sc->add_option("--kspace", ca.kspace)->required();
  sc->add_option("--mask", ca.mask)->required();
  sc->add_option("--config", ca.config);
  sc->add_option("--out", ca.out, "Output filter container")->required();

  auto *sb = app.add_subcommand("baseline", "Classical reconstructions");
  sb->add_option("method", bl.method, "pm, grappa-op or zero-filled")->required();
  sb->add_option("--kspace", bl.kspace)->required();
  sb->add_option("--mask", bl.mask)->required();
  sb->add_option("--sens", bl.sens)->required();
  sb->add_option("--lambda", bl.lambda)->capture_default_str();
  sb->add_option("--step", bl.step)->capture_default_str();
  sb->add_option("--iters", bl.iters)->capture_default_str();
  sb->add_option("--eps", bl.eps)->capture_default_str();
  sb->add_option("--out", bl.out, "Output image container")->required();

  MetricsArgs mt;
  auto *sx = app.add_subcommand("metrics", "NMSE, PSNR and SSIM between two containers");
  sx->add_option("--ref", mt.ref)->required();
  sx->add_option("--test", mt.test)->required();
  sx->add_option("--sens", mt.sens, "Coil maps for combining k-space inputs");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    app.parse(std::move(reversed));
  } catch (CLI::ParseError const &e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    emit_error(err, to_string(ErrorKind::Usage), e.what());
    return 2;
  }

  try {
    if (sp->parsed()) cmd_phantom(ph, out);
    else if (sm->parsed()) cmd_mask(mk, out);
    else if (sf->parsed()) cmd_forward(fw, out);
    else if (st->parsed()) cmd_train(tr, out);
    else if (sr->parsed()) cmd_reconstruct(rc, out);
    else if (sc->parsed()) cmd_calibrate(ca, out);
    else if (sb->parsed()) cmd_baseline(bl, out);
    else if (sx->parsed()) cmd_metrics(mt, out);
  } catch (Error const &e) {
    emit_error(err, to_string(e.kind()), e.what());
    return e.kind() == ErrorKind::Usage ? 2 : 1;
  } catch (fs::filesystem_error const &e) {
    emit_error(err, to_string(ErrorKind::Io), e.what());
    return 1;
  } catch (std::exception const &e) {
    emit_error(err, "internal", e.what());
    return 1;
  }
  return 0;
}

} // namespace akd::cli
