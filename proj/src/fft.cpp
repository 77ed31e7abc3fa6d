#include "akd/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace akd {

namespace {

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. Plans are created once per (ky, kx, sign) under a lock.
class PlanCache {
public:
  ~PlanCache() {
    for (auto &[key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(Index ky, Index kx, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(ky, kx, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto *buf = fftw_alloc_complex(static_cast<std::size_t>(ky * kx));
    fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(ky), static_cast<int>(kx), buf, buf, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    require(plan != nullptr, ErrorKind::NumericalFailure, "fftw planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

private:
  std::mutex mutex_;
  std::map<std::tuple<Index, Index, int>, fftw_plan> plans_;
};

PlanCache &plans() {
  static PlanCache cache;
  return cache;
}

template <class In, class Out>
void transform(CoilArray<In> const &src, CoilArray<Out> &dst, int sign) {
  for (Index i = 0; i < src.size(); ++i) {
    if (!std::isfinite(src[i].real()) || !std::isfinite(src[i].imag())) {
      fail(ErrorKind::InvalidArgument, "fft: non-finite input sample");
    }
  }
  Index const ky = src.ky();
  Index const kx = src.kx();
  Index const cy = ky / 2;
  Index const cx = kx / 2;
  double const scale = 1.0 / std::sqrt(static_cast<double>(ky * kx));
  fftw_plan plan = plans().get(ky, kx, sign);

#pragma omp parallel
  {
    std::vector<Cx> buf(static_cast<std::size_t>(ky * kx));
#pragma omp for schedule(static)
    for (Index c = 0; c < src.nc(); ++c) {
      auto in = src.coil(c);
      // move the centered origin to index 0
      for (Index y = 0; y < ky; ++y) {
        Index const sy = (y + cy) % ky;
        for (Index x = 0; x < kx; ++x) {
          buf[static_cast<std::size_t>(y * kx + x)] = in[static_cast<std::size_t>(sy * kx + (x + cx) % kx)];
        }
      }
      auto *p = reinterpret_cast<fftw_complex *>(buf.data());
      fftw_execute_dft(plan, p, p);
      auto out = dst.coil(c);
      for (Index y = 0; y < ky; ++y) {
        Index const sy = (y + cy) % ky;
        for (Index x = 0; x < kx; ++x) {
          out[static_cast<std::size_t>(sy * kx + (x + cx) % kx)] = buf[static_cast<std::size_t>(y * kx + x)] * scale;
        }
      }
    }
  }
}

} // namespace

KSpaceTensor fft2(ImageTensor const &img) {
  KSpaceTensor out(img.dims());
  transform(img, out, FFTW_FORWARD);
  return out;
}

ImageTensor ifft2(KSpaceTensor const &z) {
  ImageTensor out(z.dims());
  transform(z, out, FFTW_BACKWARD);
  return out;
}

void dft2_inplace(std::span<Cx> plane, Index ky, Index kx, bool inverse) {
  require(static_cast<Index>(plane.size()) == ky * kx, ErrorKind::DimensionMismatch,
          "dft2_inplace: plane size does not match the grid");
  fftw_plan plan = plans().get(ky, kx, inverse ? FFTW_BACKWARD : FFTW_FORWARD);
  auto *p = reinterpret_cast<fftw_complex *>(plane.data());
  fftw_execute_dft(plan, p, p);
}

double centered_frequency(Index i, Index n) {
  return static_cast<double>(i - n / 2) / static_cast<double>(n);
}

} // namespace akd
