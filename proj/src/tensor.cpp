#include "akd/tensor.hpp"

#include <algorithm>
#include <string>

namespace akd {

void validate_dims(Dims const &d) {
  if (d.nc < 1 || d.ky < 2 || d.kx < 2) {
    fail(ErrorKind::InvalidDimension, "invalid dims (nc=" + std::to_string(d.nc) + ", ky=" +
                                          std::to_string(d.ky) + ", kx=" + std::to_string(d.kx) +
                                          "): need nc >= 1, ky >= 2, kx >= 2");
  }
}

RealGrid::RealGrid(Index ky, Index kx, double fill) : ky_(ky), kx_(kx) {
  require(ky >= 1 && kx >= 1, ErrorKind::InvalidDimension, "RealGrid: empty grid");
  data_.assign(static_cast<std::size_t>(ky * kx), fill);
}

RealGrid::RealGrid(Index ky, Index kx, std::vector<double> data)
    : ky_(ky), kx_(kx), data_(std::move(data)) {
  require(ky >= 1 && kx >= 1, ErrorKind::InvalidDimension, "RealGrid: empty grid");
  require(static_cast<Index>(data_.size()) == ky * kx, ErrorKind::DimensionMismatch,
          "RealGrid: data length does not match dims");
}

double RealGrid::max() const { return *std::max_element(data_.begin(), data_.end()); }

} // namespace akd
