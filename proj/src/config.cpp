#include "akd/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace akd {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(std::string const &field, std::string const &why) {
  fail(ErrorKind::ConfigValidation, "config: " + field + " " + why);
}

json const *section(json const &doc, char const *name, std::set<std::string> const &keys) {
  auto it = doc.find(name);
  if (it == doc.end()) return nullptr;
  if (!it->is_object()) invalid(name, "must be an object");
  for (auto const &[k, v] : it->items()) {
    if (!keys.contains(k)) invalid(std::string(name) + "." + k, "is not a recognized key");
  }
  return &*it;
}

template <class T> void read(json const *sec, char const *sname, char const *key, T &out) {
  if (sec == nullptr) return;
  auto it = sec->find(key);
  if (it == sec->end() || it->is_null()) return;
  std::string const field = std::string(sname) + "." + key;
  if constexpr (std::is_same_v<T, std::string>) {
    if (!it->is_string()) invalid(field, "must be a string");
    out = it->template get<std::string>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_integer()) invalid(field, "must be an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (it->is_number_unsigned()) {
        out = it->template get<T>();
      } else {
        auto const v = it->template get<long long>();
        if (v < 0) invalid(field, "must be non-negative");
        out = static_cast<T>(v);
      }
    } else {
      out = static_cast<T>(it->template get<long long>());
    }
  } else {
    if (!it->is_number()) invalid(field, "must be a number");
    out = it->template get<double>();
    if (!std::isfinite(out)) invalid(field, "must be finite");
  }
}

void validate(RunConfig const &c) {
  auto const &s = c.schedule;
  if (s.n_steps < 1) invalid("schedule.N", "must be >= 1");
  if (!(s.sigma0 > 0.0)) invalid("schedule.sigma0", "must be > 0");
  if (!(s.sigma_n > s.sigma0)) invalid("schedule.sigmaN", "must exceed sigma0");
  if (s.tau_n && !(*s.tau_n > 0.0)) invalid("schedule.tauN", "must be > 0");
  if (!(s.gamma > 0.0)) invalid("schedule.gamma", "must be > 0");

  auto const &p = c.sampler;
  if (!(p.lambda >= 0.0)) invalid("sampler.lambda", "must be >= 0");
  if (!(p.r > 0.0)) invalid("sampler.r", "must be > 0");
  if (p.corrector_steps < 0) invalid("sampler.M", "must be >= 0");

  auto const &l = c.slr;
  if (l.window.wy < 1) invalid("slr.wy", "must be >= 1");
  if (l.window.wx < 1) invalid("slr.wx", "must be >= 1");
  if (!(l.rank_threshold > 0.0 && l.rank_threshold < 1.0)) invalid("slr.rank_threshold", "must lie in (0, 1)");
  if (l.cg_iters < 0) invalid("slr.cg_iters", "must be >= 0");
  if (!(l.cg_tol > 0.0)) invalid("slr.cg_tol", "must be > 0");

  auto const &m = c.mask;
  if (m.R < 1) invalid("mask.R", "must be >= 1");
  if (m.acs_lines < 0) invalid("mask.acs_lines", "must be >= 0");
  if (m.acs_size < 1) invalid("mask.acs_size", "must be >= 1");
}

} // namespace

DiffusionSchedule RunConfig::build(Index ky, Index kx) const {
  double const tau = schedule.tau_n ? *schedule.tau_n : default_tau_n(mask.acs_lines, ky);
  try {
    return build_schedule(schedule.n_steps, schedule.sigma0, schedule.sigma_n, tau, schedule.gamma, ky, kx);
  } catch (Error const &e) {
    fail(ErrorKind::ConfigValidation, std::string("config: schedule rejected: ") + e.what());
  }
}

RunConfig parse_run_config(json const &doc) {
  if (!doc.is_object()) invalid("document", "must be a JSON object");
  for (auto const &[k, v] : doc.items()) {
    static std::set<std::string> const top{"schedule", "sampler", "slr", "mask", "paths"};
    if (!top.contains(k)) invalid(k, "is not a recognized section");
  }
  RunConfig c;

  json const *s = section(doc, "schedule", {"N", "sigma0", "sigmaN", "tauN", "gamma"});
  read(s, "schedule", "N", c.schedule.n_steps);
  read(s, "schedule", "sigma0", c.schedule.sigma0);
  read(s, "schedule", "sigmaN", c.schedule.sigma_n);
  if (s != nullptr && s->contains("tauN") && !(*s)["tauN"].is_null()) {
    double t = 0.0;
    read(s, "schedule", "tauN", t);
    c.schedule.tau_n = t;
  }
  read(s, "schedule", "gamma", c.schedule.gamma);

  json const *p = section(doc, "sampler", {"lambda", "r", "M", "seed"});
  read(p, "sampler", "lambda", c.sampler.lambda);
  read(p, "sampler", "r", c.sampler.r);
  read(p, "sampler", "M", c.sampler.corrector_steps);
  read(p, "sampler", "seed", c.sampler.seed);

  json const *l = section(doc, "slr", {"wy", "wx", "rank_threshold", "cg_iters", "cg_tol"});
  read(l, "slr", "wy", c.slr.window.wy);
  read(l, "slr", "wx", c.slr.window.wx);
  read(l, "slr", "rank_threshold", c.slr.rank_threshold);
  read(l, "slr", "cg_iters", c.slr.cg_iters);
  read(l, "slr", "cg_tol", c.slr.cg_tol);

  json const *m = section(doc, "mask", {"kind", "R", "acs_lines", "acs_size", "seed"});
  std::string kind = to_string(c.mask.kind);
  read(m, "mask", "kind", kind);
  try {
    c.mask.kind = parse_mask_kind(kind);
  } catch (Error const &) {
    invalid("mask.kind", "must be one of uniform, random, acs-only");
  }
  read(m, "mask", "R", c.mask.R);
  read(m, "mask", "acs_lines", c.mask.acs_lines);
  read(m, "mask", "acs_size", c.mask.acs_size);
  read(m, "mask", "seed", c.mask.seed);

  if (auto it = doc.find("paths"); it != doc.end()) {
    if (!it->is_object()) invalid("paths", "must be an object");
    for (auto const &[k, v] : it->items()) {
      if (!v.is_string()) invalid("paths." + k, "must be a string");
      c.paths[k] = v.get<std::string>();
    }
  }

  c.sampler.n_steps = c.schedule.n_steps;
  c.sampler.cg_iters = c.slr.cg_iters;
  c.sampler.cg_tol = c.slr.cg_tol;
  validate(c);
  return c;
}

RunConfig load_run_config(std::filesystem::path const &path) {
  std::ifstream f(path);
  require(static_cast<bool>(f), ErrorKind::Io, "cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(f);
  } catch (json::exception const &e) {
    fail(ErrorKind::ConfigValidation, std::string("config: not valid JSON: ") + e.what());
  }
  return parse_run_config(doc);
}

nlohmann::ordered_json to_json(RunConfig const &c) {
  nlohmann::ordered_json j;
  j["schedule"]["N"] = c.schedule.n_steps;
  j["schedule"]["sigma0"] = c.schedule.sigma0;
  j["schedule"]["sigmaN"] = c.schedule.sigma_n;
  if (c.schedule.tau_n) j["schedule"]["tauN"] = *c.schedule.tau_n;
  else j["schedule"]["tauN"] = nullptr;
  j["schedule"]["gamma"] = c.schedule.gamma;
  j["sampler"]["lambda"] = c.sampler.lambda;
  j["sampler"]["r"] = c.sampler.r;
  j["sampler"]["M"] = c.sampler.corrector_steps;
  j["sampler"]["seed"] = c.sampler.seed;
  j["slr"]["wy"] = c.slr.window.wy;
  j["slr"]["wx"] = c.slr.window.wx;
  j["slr"]["rank_threshold"] = c.slr.rank_threshold;
  j["slr"]["cg_iters"] = c.slr.cg_iters;
  j["slr"]["cg_tol"] = c.slr.cg_tol;
  j["mask"]["kind"] = to_string(c.mask.kind);
  j["mask"]["R"] = c.mask.R;
  j["mask"]["acs_lines"] = c.mask.acs_lines;
  j["mask"]["acs_size"] = c.mask.acs_size;
  j["mask"]["seed"] = c.mask.seed;
  j["paths"] = nlohmann::ordered_json::object();
  for (auto const &[k, v] : c.paths) j["paths"][k] = v;
  return j;
}

} // namespace akd
