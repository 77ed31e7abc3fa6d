#pragma once

#include <filesystem>

#include "akd/tensor.hpp"

namespace akd {

/// 8-bit grayscale PNG of a magnitude image, scaled so its maximum maps to 255.
/// An all-zero image is written black.
void write_png(std::filesystem::path const &path, RealGrid const &magnitude);

} // namespace akd
