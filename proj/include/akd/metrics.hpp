#pragma once

#include "akd/tensor.hpp"

namespace akd {

/// Per-pixel sqrt(sum_c |x_c|^2).
RealGrid sos_combine(ImageTensor const &x);

/// ||test - ref||^2 / ||ref||^2. Throws UndefinedReference for an all-zero ref.
double nmse(RealGrid const &ref, RealGrid const &test);

/// 10 log10(max(ref)^2 / mse); +infinity when the images are identical.
double psnr(RealGrid const &ref, RealGrid const &test);

struct SsimParams {
  Index window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean local SSIM over every window position fully inside the image, with a
/// normalized Gaussian window. Dynamic range is max(ref), or 1 if that is not
/// positive. Throws InvalidDimension if the image is smaller than the window.
double ssim(RealGrid const &ref, RealGrid const &test, SsimParams const &p = {});

/// Same with an explicit dynamic range.
double ssim(RealGrid const &ref, RealGrid const &test, double dynamic_range, SsimParams const &p = {});

} // namespace akd
