#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "akd/error.hpp"

namespace akd {

using Index = std::ptrdiff_t;
using Cx = std::complex<double>;

/// Shape of a multi-coil 2-D array: coil count, phase-encode lines, readout columns.
struct Dims {
  Index nc = 0;
  Index ky = 0;
  Index kx = 0;

  Index plane() const { return ky * kx; }
  Index size() const { return nc * ky * kx; }
  bool operator==(Dims const &) const = default;
};

/// Throws InvalidDimension unless nc >= 1, ky >= 2, kx >= 2.
void validate_dims(Dims const &d);

struct KSpaceDomain {};
struct ImageDomain {};

/// Complex multi-coil array, coil-major then row-major. The domain tag keeps
/// k-space and image-space values from being mixed up at compile time.
template <class Domain> class CoilArray {
public:
  explicit CoilArray(Dims d) : dims_(d) {
    validate_dims(d);
    data_.assign(static_cast<std::size_t>(d.size()), Cx{0.0, 0.0});
  }

  CoilArray(Dims d, std::vector<Cx> data) : dims_(d), data_(std::move(data)) {
    validate_dims(d);
    require(static_cast<Index>(data_.size()) == d.size(), ErrorKind::DimensionMismatch,
            "CoilArray: data length does not match dims");
  }

  Dims dims() const { return dims_; }
  Index nc() const { return dims_.nc; }
  Index ky() const { return dims_.ky; }
  Index kx() const { return dims_.kx; }
  Index size() const { return dims_.size(); }

  Cx &operator()(Index c, Index y, Index x) { return data_[offset(c, y, x)]; }
  Cx const &operator()(Index c, Index y, Index x) const { return data_[offset(c, y, x)]; }
  Cx &operator[](Index i) { return data_[static_cast<std::size_t>(i)]; }
  Cx const &operator[](Index i) const { return data_[static_cast<std::size_t>(i)]; }

  std::span<Cx> span() { return data_; }
  std::span<Cx const> span() const { return data_; }
  std::span<Cx> coil(Index c) { return span().subspan(static_cast<std::size_t>(c * dims_.plane()), static_cast<std::size_t>(dims_.plane())); }
  std::span<Cx const> coil(Index c) const { return span().subspan(static_cast<std::size_t>(c * dims_.plane()), static_cast<std::size_t>(dims_.plane())); }
  std::vector<Cx> const &values() const { return data_; }

  CoilArray &operator+=(CoilArray const &o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  CoilArray &operator-=(CoilArray const &o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  CoilArray &operator*=(Cx a) {
    for (auto &v : data_) v *= a;
    return *this;
  }
  CoilArray &operator*=(double a) {
    for (auto &v : data_) v *= a;
    return *this;
  }

  /// this += a * x
  CoilArray &axpy(Cx a, CoilArray const &x) {
    check_same(x);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * x.data_[i];
    return *this;
  }

  friend CoilArray operator+(CoilArray a, CoilArray const &b) { return a += b; }
  friend CoilArray operator-(CoilArray a, CoilArray const &b) { return a -= b; }
  friend CoilArray operator*(Cx s, CoilArray a) { return a *= s; }
  friend CoilArray operator*(double s, CoilArray a) { return a *= s; }

  bool operator==(CoilArray const &) const = default;

private:
  std::size_t offset(Index c, Index y, Index x) const {
    return static_cast<std::size_t>((c * dims_.ky + y) * dims_.kx + x);
  }
  void check_same(CoilArray const &o) const {
    require(o.dims_ == dims_, ErrorKind::DimensionMismatch, "CoilArray: dims differ");
  }

  Dims dims_;
  std::vector<Cx> data_;
};

using KSpaceTensor = CoilArray<KSpaceDomain>;
using ImageTensor = CoilArray<ImageDomain>;

/// Real-valued (ky, kx) grid: attenuation masks, magnitude images.
class RealGrid {
public:
  RealGrid(Index ky, Index kx, double fill = 0.0);
  RealGrid(Index ky, Index kx, std::vector<double> data);

  Index ky() const { return ky_; }
  Index kx() const { return kx_; }
  Index size() const { return ky_ * kx_; }

  double &operator()(Index y, Index x) { return data_[static_cast<std::size_t>(y * kx_ + x)]; }
  double operator()(Index y, Index x) const { return data_[static_cast<std::size_t>(y * kx_ + x)]; }
  double &operator[](Index i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](Index i) const { return data_[static_cast<std::size_t>(i)]; }

  std::span<double> span() { return data_; }
  std::span<double const> span() const { return data_; }
  std::vector<double> const &values() const { return data_; }

  double max() const;
  bool operator==(RealGrid const &) const = default;

private:
  Index ky_;
  Index kx_;
  std::vector<double> data_;
};

template <class D> Cx inner(CoilArray<D> const &a, CoilArray<D> const &b) {
  require(a.dims() == b.dims(), ErrorKind::DimensionMismatch, "inner: dims differ");
  Cx acc{0.0, 0.0};
  for (Index i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

template <class D> double squared_norm(CoilArray<D> const &a) {
  double acc = 0.0;
  for (Index i = 0; i < a.size(); ++i) acc += std::norm(a[i]);
  return acc;
}

template <class D> double norm(CoilArray<D> const &a) { return std::sqrt(squared_norm(a)); }

/// ||a - b|| / ||b||; returns ||a|| when b is zero.
template <class D> double relative_error(CoilArray<D> const &a, CoilArray<D> const &b) {
  require(a.dims() == b.dims(), ErrorKind::DimensionMismatch, "relative_error: dims differ");
  double num = 0.0;
  double den = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

template <class D> double max_abs_diff(CoilArray<D> const &a, CoilArray<D> const &b) {
  require(a.dims() == b.dims(), ErrorKind::DimensionMismatch, "max_abs_diff: dims differ");
  double m = 0.0;
  for (Index i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <class D> bool all_finite(CoilArray<D> const &a) {
  for (Index i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i].real()) || !std::isfinite(a[i].imag())) return false;
  }
  return true;
}

/// Pointwise product of a (ky, kx) grid with every coil of z.
template <class D> CoilArray<D> multiply(RealGrid const &g, CoilArray<D> z) {
  require(g.ky() == z.ky() && g.kx() == z.kx(), ErrorKind::DimensionMismatch,
          "multiply: grid and tensor planes differ");
  Index const plane = g.size();
  for (Index c = 0; c < z.nc(); ++c) {
    auto coil = z.coil(c);
    for (Index p = 0; p < plane; ++p) coil[static_cast<std::size_t>(p)] *= g[p];
  }
  return z;
}

/// Reinterprets the samples of one domain as the other, without any transform.
template <class To, class From> CoilArray<To> retag(CoilArray<From> const &a) {
  return CoilArray<To>(a.dims(), a.values());
}

} // namespace akd
