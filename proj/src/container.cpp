#include "akd/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace akd {

namespace {

constexpr char kMagic[] = "MCKS1\n";
constexpr std::size_t kMagicLen = 6;
constexpr std::size_t kMaxHeader = 4096;

void put_u32(std::vector<std::uint8_t> &out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(std::uint8_t const *p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void put_f32(std::vector<std::uint8_t> &out, double v) {
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

double get_f32(std::uint8_t const *p) { return static_cast<double>(std::bit_cast<float>(get_u32(p))); }

template <class D> TensorContainer pack_complex(CoilArray<D> const &a, Role role) {
  TensorContainer c{a.dims(), DType::C64, role, 1, {}};
  c.payload.reserve(static_cast<std::size_t>(a.size()) * 8);
  for (Index i = 0; i < a.size(); ++i) {
    put_f32(c.payload, a[i].real());
    put_f32(c.payload, a[i].imag());
  }
  return c;
}

template <class D> CoilArray<D> unpack_complex(TensorContainer const &c) {
  require(c.dtype == DType::C64 && c.count == 1, ErrorKind::MalformedContainer,
          "container: expected a single c64 tensor");
  CoilArray<D> a(c.dims);
  for (Index i = 0; i < a.size(); ++i) {
    std::uint8_t const *p = c.payload.data() + 8 * i;
    a[i] = Cx{get_f32(p), get_f32(p + 4)};
  }
  return a;
}

Index header_int(nlohmann::json const &h, char const *key) {
  auto it = h.find(key);
  require(it != h.end() && it->is_number_integer(), ErrorKind::MalformedContainer,
          std::string("container: header field '") + key + "' missing or not an integer");
  auto const v = it->get<long long>();
  require(v >= 1 && v <= (1LL << 30), ErrorKind::MalformedContainer,
          std::string("container: header field '") + key + "' out of range");
  return static_cast<Index>(v);
}

std::string header_string(nlohmann::json const &h, char const *key) {
  auto it = h.find(key);
  require(it != h.end() && it->is_string(), ErrorKind::MalformedContainer,
          std::string("container: header field '") + key + "' missing or not a string");
  return it->get<std::string>();
}

} // namespace

std::string to_string(DType t) {
  switch (t) {
  case DType::C64: return "c64";
  case DType::F32: return "f32";
  case DType::U8: return "u8";
  }
  return "c64";
}

std::string to_string(Role r) {
  switch (r) {
  case Role::KSpace: return "kspace";
  case Role::Image: return "image";
  case Role::Mask: return "mask";
  case Role::Sens: return "sens";
  case Role::Gains: return "gains";
  case Role::Filter: return "filter";
  }
  return "kspace";
}

DType parse_dtype(std::string const &s) {
  if (s == "c64") return DType::C64;
  if (s == "f32") return DType::F32;
  if (s == "u8") return DType::U8;
  fail(ErrorKind::MalformedContainer, "container: unknown dtype '" + s + "'");
}

Role parse_role(std::string const &s) {
  if (s == "kspace") return Role::KSpace;
  if (s == "image") return Role::Image;
  if (s == "mask") return Role::Mask;
  if (s == "sens") return Role::Sens;
  if (s == "gains") return Role::Gains;
  if (s == "filter") return Role::Filter;
  fail(ErrorKind::MalformedContainer, "container: unknown role '" + s + "'");
}

std::size_t dtype_size(DType t) {
  switch (t) {
  case DType::C64: return 8;
  case DType::F32: return 4;
  case DType::U8: return 1;
  }
  return 1;
}

std::size_t TensorContainer::payload_bytes() const {
  return static_cast<std::size_t>(dims.size()) * static_cast<std::size_t>(count) * dtype_size(dtype);
}

std::string encode(TensorContainer const &c) {
  require(c.count >= 0 && (c.role == Role::Filter || c.count == 1), ErrorKind::MalformedContainer,
          "container: only filter containers may stack tensors");
  require(c.payload.size() == c.payload_bytes(), ErrorKind::MalformedContainer,
          "container: payload length does not match header");
  nlohmann::ordered_json h;
  h["nc"] = c.dims.nc;
  h["ky"] = c.dims.ky;
  h["kx"] = c.dims.kx;
  h["dtype"] = to_string(c.dtype);
  h["role"] = to_string(c.role);
  if (c.role == Role::Filter) h["count"] = c.count;
  std::string out(kMagic, kMagicLen);
  out += h.dump();
  out += '\n';
  out.append(reinterpret_cast<char const *>(c.payload.data()), c.payload.size());
  return out;
}

TensorContainer decode(std::string const &bytes) {
  require(bytes.size() >= kMagicLen && bytes.compare(0, kMagicLen, kMagic) == 0,
          ErrorKind::MalformedContainer, "container: bad magic");
  auto const nl = bytes.find('\n', kMagicLen);
  require(nl != std::string::npos && nl - kMagicLen <= kMaxHeader, ErrorKind::MalformedContainer,
          "container: header line missing or too long");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.substr(kMagicLen, nl - kMagicLen));
  } catch (nlohmann::json::exception const &e) {
    fail(ErrorKind::MalformedContainer, std::string("container: header is not JSON: ") + e.what());
  }
  require(h.is_object(), ErrorKind::MalformedContainer, "container: header is not an object");

  TensorContainer c;
  c.dims = Dims{header_int(h, "nc"), header_int(h, "ky"), header_int(h, "kx")};
  c.dtype = parse_dtype(header_string(h, "dtype"));
  c.role = parse_role(header_string(h, "role"));
  if (c.role == Role::Filter) {
    auto it = h.find("count");
    require(it != h.end() && it->is_number_integer() && it->get<long long>() >= 0 &&
                it->get<long long>() <= (1LL << 20),
            ErrorKind::MalformedContainer, "container: filter header needs a valid 'count'");
    c.count = static_cast<Index>(it->get<long long>());
  }
  std::size_t const expected = c.payload_bytes();
  std::size_t const actual = bytes.size() - nl - 1;
  require(actual == expected, ErrorKind::MalformedContainer,
          "container: payload is " + std::to_string(actual) + " bytes, header implies " +
              std::to_string(expected));
  c.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(nl + 1), bytes.end());
  return c;
}

void write_container(std::filesystem::path const &path, TensorContainer const &c) {
  std::string const bytes = encode(c);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(f), ErrorKind::Io, "write to '" + path.string() + "' failed");
}

TensorContainer read_container(std::filesystem::path const &path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode(ss.str());
}

void write_sidecar(std::filesystem::path const &path, nlohmann::ordered_json const &meta) {
  std::filesystem::path side = path;
  side += ".json";
  std::ofstream f(side, std::ios::trunc);
  require(static_cast<bool>(f), ErrorKind::Io, "cannot open '" + side.string() + "' for writing");
  f << meta.dump(2) << '\n';
}

TensorContainer pack(KSpaceTensor const &z, Role role) { return pack_complex(z, role); }
TensorContainer pack(ImageTensor const &x, Role role) { return pack_complex(x, role); }

TensorContainer pack(RealGrid const &g, Role role) {
  TensorContainer c{Dims{1, g.ky(), g.kx()}, DType::F32, role, 1, {}};
  c.payload.reserve(static_cast<std::size_t>(g.size()) * 4);
  for (Index i = 0; i < g.size(); ++i) put_f32(c.payload, g[i]);
  return c;
}

TensorContainer pack(SamplingMask const &m) {
  return TensorContainer{Dims{1, m.ky(), m.kx()}, DType::U8, Role::Mask, 1, m.bits()};
}

TensorContainer pack(AnnihilationFilter const &f) {
  TensorContainer c{Dims{f.nc, f.window.wy, f.window.wx}, DType::C64, Role::Filter, f.count(), {}};
  c.payload.reserve(static_cast<std::size_t>(f.filters.size()) * 8);
  for (Index j = 0; j < f.filters.cols(); ++j) {
    for (Index r = 0; r < f.filters.rows(); ++r) {
      put_f32(c.payload, f.filters(r, j).real());
      put_f32(c.payload, f.filters(r, j).imag());
    }
  }
  return c;
}

AnnihilationFilter unpack_filter(TensorContainer const &c) {
  require(c.role == Role::Filter && c.dtype == DType::C64, ErrorKind::MalformedContainer,
          "container: expected a c64 filter bank");
  AnnihilationFilter f;
  f.nc = c.dims.nc;
  f.window = HankelConfig{c.dims.ky, c.dims.kx};
  f.rank_threshold = 0.0;
  f.filters.resize(c.dims.size(), c.count);
  std::uint8_t const *p = c.payload.data();
  for (Index j = 0; j < c.count; ++j) {
    for (Index r = 0; r < c.dims.size(); ++r, p += 8) f.filters(r, j) = Cx{get_f32(p), get_f32(p + 4)};
  }
  f.empty_nullspace = c.count == 0;
  return f;
}

KSpaceTensor unpack_kspace(TensorContainer const &c) { return unpack_complex<KSpaceDomain>(c); }
ImageTensor unpack_image(TensorContainer const &c) { return unpack_complex<ImageDomain>(c); }

RealGrid unpack_real(TensorContainer const &c) {
  require(c.dtype == DType::F32 && c.dims.nc == 1, ErrorKind::MalformedContainer,
          "container: expected a single-plane f32 payload");
  RealGrid g(c.dims.ky, c.dims.kx);
  for (Index i = 0; i < g.size(); ++i) g[i] = get_f32(c.payload.data() + 4 * i);
  return g;
}

SamplingMask unpack_mask(TensorContainer const &c) {
  require(c.dtype == DType::U8 && c.dims.nc == 1 && c.role == Role::Mask, ErrorKind::MalformedContainer,
          "container: expected a u8 mask");
  for (auto b : c.payload) {
    require(b <= 1, ErrorKind::MalformedContainer, "container: mask values must be 0 or 1");
  }
  return SamplingMask::from_bits(c.dims.ky, c.dims.kx, c.payload);
}

} // namespace akd
