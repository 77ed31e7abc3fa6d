#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "akd/mask.hpp"
#include "akd/slr.hpp"
#include "akd/tensor.hpp"

namespace akd {

// On-disk layout: "MCKS1\n", a one-line JSON header with keys in the order
// nc, ky, kx, dtype, role, a newline, then the little-endian payload
// (coil-major, row-major). c64 stores interleaved float32 (re, im) pairs.
// Annihilation filters use role "filter": nc, ky, kx give the coil count and
// window, an extra "count" key after "role" gives the number of filters, and
// the payload holds the filters one after another.

enum class DType { C64, F32, U8 };
enum class Role { KSpace, Image, Mask, Sens, Gains, Filter };

std::string to_string(DType t);
std::string to_string(Role r);
DType parse_dtype(std::string const &s);
Role parse_role(std::string const &s);
std::size_t dtype_size(DType t);

struct TensorContainer {
  Dims dims;
  DType dtype = DType::C64;
  Role role = Role::KSpace;
  /// Number of stacked tensors; only filters use a value other than 1.
  Index count = 1;
  std::vector<std::uint8_t> payload;

  std::size_t payload_bytes() const;
  bool operator==(TensorContainer const &) const = default;
};

std::string encode(TensorContainer const &c);
/// Throws MalformedContainer on a bad magic, header or payload length.
TensorContainer decode(std::string const &bytes);

void write_container(std::filesystem::path const &path, TensorContainer const &c);
TensorContainer read_container(std::filesystem::path const &path);

/// Writes `<path>.json` next to an output file.
void write_sidecar(std::filesystem::path const &path, nlohmann::ordered_json const &meta);

// Conversions. Complex data is narrowed to float32 on the way in.
TensorContainer pack(KSpaceTensor const &z, Role role = Role::KSpace);
TensorContainer pack(ImageTensor const &x, Role role = Role::Image);
TensorContainer pack(RealGrid const &g, Role role = Role::Image);
TensorContainer pack(SamplingMask const &m);
TensorContainer pack(AnnihilationFilter const &f);

/// Complex payload as a k-space tensor (c64 only).
KSpaceTensor unpack_kspace(TensorContainer const &c);
/// Complex payload as an image tensor (c64 only).
ImageTensor unpack_image(TensorContainer const &c);
/// Single-plane f32 payload.
RealGrid unpack_real(TensorContainer const &c);
/// u8 payload with role mask.
SamplingMask unpack_mask(TensorContainer const &c);
/// Filter bank; the rank threshold is not stored and comes back as 0.
AnnihilationFilter unpack_filter(TensorContainer const &c);

} // namespace akd
