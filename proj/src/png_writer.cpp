#include "akd/png_writer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include <png.h>

namespace akd {

void write_png(std::filesystem::path const &path, RealGrid const &magnitude) {
  std::unique_ptr<FILE, int (*)(FILE *)> file(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  require(file != nullptr, ErrorKind::Io, "cannot open '" + path.string() + "' for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(png != nullptr, ErrorKind::Io, "png: cannot create writer");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    fail(ErrorKind::Io, "png: cannot create info struct");
  }

  auto const width = static_cast<png_uint_32>(magnitude.kx());
  auto const height = static_cast<png_uint_32>(magnitude.ky());
  double const peak = magnitude.max();
  double const scale = peak > 0.0 ? 255.0 / peak : 0.0;
  std::vector<png_byte> pixels(static_cast<std::size_t>(width) * height);
  for (Index i = 0; i < magnitude.size(); ++i) {
    double const v = std::clamp(std::round(magnitude[i] * scale), 0.0, 255.0);
    pixels[static_cast<std::size_t>(i)] = static_cast<png_byte>(v);
  }
  std::vector<png_bytep> rows(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = pixels.data() + static_cast<std::size_t>(r) * width;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorKind::Io, "png: write of '" + path.string() + "' failed");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
}

} // namespace akd
