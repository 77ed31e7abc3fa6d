#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "cli.hpp"
#include "akd/config.hpp"
#include "akd/container.hpp"
#include "akd/metrics.hpp"
#include "akd/phantom.hpp"
#include "helpers.hpp"

using namespace akd;
using akd::test::random_grid;
using akd::test::random_tensor;

namespace fs = std::filesystem;

namespace {

fs::path scratch(std::string const &name) {
  fs::path const p = fs::temp_directory_path() / ("akd_tests_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct Run {
  int rc;
  std::string out, err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "akd");
  std::ostringstream out, err;
  int const rc = akd::cli::cli_run(args, out, err);
  return {rc, out.str(), err.str()};
}

ErrorKind kind_of(auto &&f) {
  try {
    f();
  } catch (Error const &e) {
    return e.kind();
  }
  return ErrorKind::Io;
}

} // namespace

TEST_CASE("sos combine") {
  ImageTensor x(Dims{2, 2, 2});
  x(0, 0, 0) = 3.0;
  x(1, 0, 0) = Cx{0.0, 4.0};
  x(0, 1, 1) = Cx{-2.0, 0.0};
  auto const g = sos_combine(x);
  CHECK(g(0, 0) == doctest::Approx(5.0));
  CHECK(g(1, 1) == doctest::Approx(2.0));
  CHECK(g(0, 1) == 0.0);

  auto const r = random_tensor<ImageDomain>(Dims{3, 8, 8}, 91);
  auto rotated = r;
  for (Index c = 0; c < 3; ++c) {
    for (auto &v : rotated.coil(c)) v *= std::polar(1.0, 0.7 * static_cast<double>(c + 1));
  }
  auto const a = sos_combine(r), b = sos_combine(rotated);
  for (Index i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
}

TEST_CASE("nmse and psnr") {
  auto const ref = random_grid(16, 16, 92, 0.1, 1.0);
  CHECK(nmse(ref, ref) == 0.0);
  CHECK(nmse(ref, RealGrid(16, 16)) == doctest::Approx(1.0));
  RealGrid scaled = ref;
  for (auto &v : scaled.span()) v *= 1.1;
  CHECK(nmse(ref, scaled) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(kind_of([] { nmse(RealGrid(4, 4), RealGrid(4, 4, 1.0)); }) == ErrorKind::UndefinedReference);

  CHECK(psnr(ref, ref) == std::numeric_limits<double>::infinity());
  RealGrid peak(10, 10, 0.0);
  peak(0, 0) = 1.0;
  RealGrid off = peak;
  // mse = 1e-3 from a uniform offset of sqrt(1e-3).
  for (auto &v : off.span()) v += std::sqrt(1e-3);
  CHECK(psnr(peak, off) == doctest::Approx(30.0).epsilon(1e-12));
}

TEST_CASE("ssim") {
  auto const ref = random_grid(32, 32, 93);
  CHECK(ssim(ref, ref) == 1.0);
  RealGrid const flat(16, 16, 0.4);
  CHECK(ssim(flat, flat) == 1.0);
  auto noisy = [&](double amp) {
    RealGrid g = ref;
    auto const n = random_grid(32, 32, 94, -1.0, 1.0);
    for (Index i = 0; i < g.size(); ++i) g[i] += amp * n[i];
    return g;
  };
  double const s1 = ssim(ref, noisy(0.2)), s2 = ssim(ref, noisy(0.6));
  CHECK(s1 < 1.0);
  CHECK(s2 < s1);
  CHECK(kind_of([] { ssim(RealGrid(8, 8, 1.0), RealGrid(8, 8, 1.0)); }) == ErrorKind::InvalidDimension);
}

TEST_CASE("container round trips") {
  auto const z = random_tensor(Dims{3, 5, 7}, 95);
  auto const c1 = pack(z);
  auto const back = decode(encode(c1));
  CHECK(back == c1);
  CHECK(encode(pack(unpack_kspace(back))) == encode(c1));

  auto const g = random_grid(4, 6, 96);
  auto const c2 = pack(g, Role::Gains);
  CHECK(decode(encode(c2)) == c2);
  CHECK(unpack_real(c2)[3] == static_cast<double>(static_cast<float>(g[3])));

  auto const mask = make_mask(MaskParams{MaskKind::Uniform, 16, 16, 4, 4, 4, 0});
  auto const c3 = pack(mask);
  CHECK(unpack_mask(decode(encode(c3))).bits() == mask.bits());

  std::string const bytes = encode(c1);
  CHECK(bytes.rfind("MCKS1\n{\"nc\":3,\"ky\":5,\"kx\":7,\"dtype\":\"c64\",\"role\":\"kspace\"}\n", 0) == 0);
  CHECK(bytes.size() == bytes.find('\n', 6) + 1 + 3 * 5 * 7 * 8);
}

TEST_CASE("filter containers") {
  auto const ph = make_phantom(32, 32, 2, 5);
  auto const f = estimate_annihilation(extract_region(ph.kspace(), Rect{8, 24, 0, 32}), HankelConfig{3, 3}, 0.05);
  auto const c = pack(f);
  auto const back = unpack_filter(decode(encode(c)));
  CHECK(back.count() == f.count());
  CHECK(back.window.wy == 3);
  CHECK(back.nc == 2);
  CHECK((back.filters - f.filters).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(encode(pack(back)) == encode(c));

  AnnihilationFilter empty;
  empty.nc = 2;
  empty.window = HankelConfig{3, 3};
  empty.filters.resize(18, 0);
  auto const e = unpack_filter(decode(encode(pack(empty))));
  CHECK(e.empty_nullspace);
}

TEST_CASE("malformed containers") {
  std::string const good = encode(pack(random_tensor(Dims{1, 2, 2}, 97)));
  auto bad = [](std::string const &s) { return kind_of([&] { decode(s); }); };
  CHECK(bad("MCKS2\n" + good.substr(6)) == ErrorKind::MalformedContainer);
  CHECK(bad(good.substr(0, good.size() - 1)) == ErrorKind::MalformedContainer);
  CHECK(bad(good + "x") == ErrorKind::MalformedContainer);
  CHECK(bad("MCKS1\n{\"nc\":1,\"ky\":2}\n") == ErrorKind::MalformedContainer);
  CHECK(bad("MCKS1\nnot json\n") == ErrorKind::MalformedContainer);
  CHECK(bad("MCKS1\n{\"nc\":1,\"ky\":2,\"kx\":2,\"dtype\":\"c128\",\"role\":\"kspace\"}\n") ==
        ErrorKind::MalformedContainer);
  CHECK(bad("MCKS1\n{\"nc\":0,\"ky\":2,\"kx\":2,\"dtype\":\"u8\",\"role\":\"mask\"}\n") ==
        ErrorKind::MalformedContainer);
  CHECK(kind_of([] { read_container("/nonexistent/file.mcks"); }) == ErrorKind::Io);
}

TEST_CASE("run configuration") {
  auto const def = parse_run_config(nlohmann::json::object());
  CHECK(def.schedule.n_steps == 50);
  CHECK(def.sampler.r == doctest::Approx(0.16));
  CHECK(!def.schedule.tau_n);
  auto const sched = def.build(64, 64);
  CHECK(sched.tau(50) == doctest::Approx(default_tau_n(16, 64)));

  auto const doc = nlohmann::json::parse(R"({"schedule":{"N":10,"tauN":3.5},"sampler":{"M":0,"seed":4},
    "slr":{"wy":5,"wx":4},"mask":{"kind":"random","R":3}})");
  auto const c = parse_run_config(doc);
  CHECK(c.sampler.n_steps == 10);
  CHECK(c.sampler.corrector_steps == 0);
  CHECK(c.slr.window.wy == 5);
  CHECK(c.mask.kind == MaskKind::Random);
  CHECK(parse_run_config(to_json(c)).sampler.seed == 4);

  auto message = [](char const *text) {
    try {
      parse_run_config(nlohmann::json::parse(text));
    } catch (Error const &e) {
      CHECK(e.kind() == ErrorKind::ConfigValidation);
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(R"({"sampler":{"r":0}})").find("sampler.r") != std::string::npos);
  CHECK(message(R"({"schedule":{"sigmaN":0.001}})").find("schedule.sigmaN") != std::string::npos);
  CHECK(message(R"({"slr":{"window":6}})").find("slr.window") != std::string::npos);
  CHECK(message(R"({"mask":{"kind":"radial"}})").find("mask.kind") != std::string::npos);
  CHECK(message(R"({"sampler":{"M":"one"}})").find("sampler.M") != std::string::npos);
  CHECK(message(R"({"extra":{}})").find("extra") != std::string::npos);
}

TEST_CASE("cli phantom, mask and metrics") {
  fs::path const dir = scratch("cli");
  auto const ph = run_cli({"phantom", "--ky", "32", "--kx", "32", "--nc", "2", "--seed", "1", "--out", dir.string()});
  REQUIRE(ph.rc == 0);
  auto const image = dir / "image.mcks";
  CHECK(fs::exists(image));
  CHECK(fs::exists(dir / "sens.mcks"));
  CHECK(fs::exists(dir / "kspace.mcks"));

  // Reading and rewriting the container reproduces the file.
  auto const c = read_container(image);
  fs::path const copy = dir / "copy.mcks";
  write_container(copy, c);
  std::ifstream a(image, std::ios::binary), b(copy, std::ios::binary);
  std::string const sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);

  auto const m = run_cli({"metrics", "--ref", image.string(), "--test", image.string()});
  CHECK(m.rc == 0);
  CHECK(m.out == "{\"nmse\":0.0,\"psnr_db\":\"inf\",\"ssim\":1.0}\n");

  auto const mk = run_cli({"mask", "--kind", "acs-only", "--ky", "32", "--kx", "32", "--acs-size", "8",
                       "--out", (dir / "mask.mcks").string()});
  CHECK(mk.rc == 0);
  CHECK(unpack_mask(read_container(dir / "mask.mcks")).count() == 8 * 32);

  auto const cal = run_cli({"calibrate", "--kspace", (dir / "kspace.mcks").string(), "--mask",
                        (dir / "mask.mcks").string(), "--out", (dir / "filter.mcks").string()});
  CHECK(cal.rc == 0);
  CHECK(read_container(dir / "filter.mcks").role == Role::Filter);
}

TEST_CASE("cli errors") {
  auto const missing = run_cli({"metrics", "--ref", "/nonexistent.mcks", "--test", "/nonexistent.mcks"});
  CHECK(missing.rc == 1);
  CHECK(missing.err.find("\"category\":\"io\"") != std::string::npos);

  auto const usage = run_cli({"reconstruct"});
  CHECK(usage.rc == 2);
  CHECK(usage.err.find("\"error\"") != std::string::npos);

  CHECK(run_cli({"frobnicate"}).rc == 2);
}

TEST_CASE("format_real") {
  CHECK(akd::cli::format_real(0.0) == "0.0");
  CHECK(akd::cli::format_real(1.0) == "1.0");
  CHECK(akd::cli::format_real(0.25) == "0.25");
  CHECK(akd::cli::format_real(1e-20) == "9.9999999999999995e-21");
}
