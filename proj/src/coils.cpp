#include "akd/coils.hpp"

#include <cmath>

#include "akd/fft.hpp"
#include "akd/kernels.hpp"

namespace akd {

namespace {

bool detect_uniform(ImageTensor const &m) {
  for (Index c = 0; c < m.nc(); ++c) {
    auto coil = m.coil(c);
    for (auto const &v : coil) {
      if (v != coil[0]) return false;
    }
  }
  return true;
}

void check_plane(Dims const &d, CoilSensitivities const &s, char const *what) {
  require(d.ky == s.ky() && d.kx == s.kx(), ErrorKind::DimensionMismatch,
          std::string(what) + ": grid does not match coil maps");
}

} // namespace

CoilSensitivities::CoilSensitivities(ImageTensor maps) : maps_(std::move(maps)) {
  Index const plane = maps_.dims().plane();
  for (Index p = 0; p < plane; ++p) {
    double acc = 0.0;
    for (Index c = 0; c < maps_.nc(); ++c) acc += std::norm(maps_[c * plane + p]);
    if (std::abs(acc - 1.0) > kNormTolerance) {
      fail(ErrorKind::InvalidArgument,
           "coil maps are not normalized (sum |s_c|^2 = " + std::to_string(acc) + ")");
    }
  }
  uniform_ = detect_uniform(maps_);
}

CoilSensitivities CoilSensitivities::normalize(ImageTensor raw) {
  Index const plane = raw.dims().plane();
  Index const nc = raw.nc();
  for (Index p = 0; p < plane; ++p) {
    double acc = 0.0;
    for (Index c = 0; c < nc; ++c) acc += std::norm(raw[c * plane + p]);
    if (acc > 0.0 && std::isfinite(acc)) {
      double const inv = 1.0 / std::sqrt(acc);
      for (Index c = 0; c < nc; ++c) raw[c * plane + p] *= inv;
    } else {
      for (Index c = 0; c < nc; ++c) raw[c * plane + p] = Cx{1.0 / std::sqrt(static_cast<double>(nc)), 0.0};
    }
  }
  return CoilSensitivities(std::move(raw));
}

CoilSensitivities CoilSensitivities::uniform(std::vector<Cx> const &weights, Index ky, Index kx) {
  Index const nc = static_cast<Index>(weights.size());
  ImageTensor maps(Dims{nc, ky, kx});
  for (Index c = 0; c < nc; ++c) {
    for (auto &v : maps.coil(c)) v = weights[static_cast<std::size_t>(c)];
  }
  return normalize(std::move(maps));
}

Eigen::MatrixXcd CoilSensitivities::mean_outer() const {
  Index const nc = maps_.nc();
  Index const plane = maps_.dims().plane();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(nc, nc);
  for (Index c = 0; c < nc; ++c) {
    for (Index d = 0; d < nc; ++d) {
      Cx acc{0.0, 0.0};
      for (Index p = 0; p < plane; ++p) acc += maps_[c * plane + p] * std::conj(maps_[d * plane + p]);
      out(c, d) = acc / static_cast<double>(plane);
    }
  }
  return out;
}

ImageTensor coil_combine(ImageTensor const &x, CoilSensitivities const &s) {
  require(x.nc() == s.nc(), ErrorKind::DimensionMismatch, "coil_combine: coil count mismatch");
  check_plane(x.dims(), s, "coil_combine");
  Index const plane = x.dims().plane();
  ImageTensor out(Dims{1, x.ky(), x.kx()});
  kernels::parallel::coil_combine(s.maps().span(), x.span(), s.nc(), plane, out.span());
  return out;
}

ImageTensor coil_expand(ImageTensor const &v, CoilSensitivities const &s) {
  require(v.nc() == 1, ErrorKind::DimensionMismatch, "coil_expand: expects a single-coil image");
  check_plane(v.dims(), s, "coil_expand");
  ImageTensor out(Dims{s.nc(), v.ky(), v.kx()});
  kernels::parallel::coil_expand(s.maps().span(), v.span(), s.nc(), v.dims().plane(), out.span());
  return out;
}

KSpaceTensor apply_s_bar_star(KSpaceTensor const &z, CoilSensitivities const &s) {
  require(z.nc() == s.nc(), ErrorKind::DimensionMismatch, "apply_s_bar_star: coil count mismatch");
  check_plane(z.dims(), s, "apply_s_bar_star");
  if (s.spatially_uniform()) {
    KSpaceTensor out(Dims{1, z.ky(), z.kx()});
    kernels::parallel::coil_combine(s.maps().span(), z.span(), s.nc(), z.dims().plane(), out.span());
    return out;
  }
  return fft2(coil_combine(ifft2(z), s));
}

KSpaceTensor apply_s_bar(KSpaceTensor const &v, CoilSensitivities const &s) {
  require(v.nc() == 1, ErrorKind::DimensionMismatch, "apply_s_bar: expects single-coil k-space");
  check_plane(v.dims(), s, "apply_s_bar");
  if (s.spatially_uniform()) {
    KSpaceTensor out(Dims{s.nc(), v.ky(), v.kx()});
    kernels::parallel::coil_expand(s.maps().span(), v.span(), s.nc(), v.dims().plane(), out.span());
    return out;
  }
  return fft2(coil_expand(ifft2(v), s));
}

KSpaceTensor apply_ss_star(KSpaceTensor const &z, CoilSensitivities const &s) {
  return apply_s_bar(apply_s_bar_star(z, s), s);
}

} // namespace akd
