#include "akd/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace akd::kernels {

namespace serial {

void coil_combine(std::span<Cx const> maps, std::span<Cx const> x, Index nc, Index plane,
                  std::span<Cx> out) {
  for (Index p = 0; p < plane; ++p) {
    Cx acc{0.0, 0.0};
    for (Index c = 0; c < nc; ++c) {
      acc += std::conj(maps[c * plane + p]) * x[c * plane + p];
    }
    out[p] = acc;
  }
}

void coil_expand(std::span<Cx const> maps, std::span<Cx const> v, Index nc, Index plane,
                 std::span<Cx> out) {
  for (Index c = 0; c < nc; ++c) {
    for (Index p = 0; p < plane; ++p) {
      out[c * plane + p] = maps[c * plane + p] * v[p];
    }
  }
}

void hankel_forward(std::span<Cx const> z, HankelShape const &shape, std::span<Cx> out) {
  Index const rows = shape.rows();
  Index const py_n = shape.patches_y();
  Index const px_n = shape.patches_x();
  Index const ky = shape.dims.ky;
  Index const kx = shape.dims.kx;
  for (Index c = 0; c < shape.dims.nc; ++c) {
    for (Index dy = 0; dy < shape.wy; ++dy) {
      for (Index dx = 0; dx < shape.wx; ++dx) {
        Index const col = (c * shape.wy + dy) * shape.wx + dx;
        for (Index py = 0; py < py_n; ++py) {
          for (Index px = 0; px < px_n; ++px) {
            out[col * rows + py * px_n + px] = z[(c * ky + py + dy) * kx + px + dx];
          }
        }
      }
    }
  }
}

void hankel_adjoint(std::span<Cx const> mat, HankelShape const &shape, std::span<Cx> z) {
  std::fill(z.begin(), z.end(), Cx{0.0, 0.0});
  Index const rows = shape.rows();
  Index const py_n = shape.patches_y();
  Index const px_n = shape.patches_x();
  Index const ky = shape.dims.ky;
  Index const kx = shape.dims.kx;
  for (Index c = 0; c < shape.dims.nc; ++c) {
    for (Index dy = 0; dy < shape.wy; ++dy) {
      for (Index dx = 0; dx < shape.wx; ++dx) {
        Index const col = (c * shape.wy + dy) * shape.wx + dx;
        for (Index py = 0; py < py_n; ++py) {
          for (Index px = 0; px < px_n; ++px) {
            z[(c * ky + py + dy) * kx + px + dx] += mat[col * rows + py * px_n + px];
          }
        }
      }
    }
  }
}

void sos(std::span<Cx const> x, Index nc, Index plane, std::span<double> out) {
  for (Index p = 0; p < plane; ++p) {
    double acc = 0.0;
    for (Index c = 0; c < nc; ++c) acc += std::norm(x[c * plane + p]);
    out[p] = std::sqrt(acc);
  }
}

} // namespace serial

namespace parallel {

void coil_combine(std::span<Cx const> maps, std::span<Cx const> x, Index nc, Index plane,
                  std::span<Cx> out) {
#pragma omp parallel for schedule(static)
  for (Index p = 0; p < plane; ++p) {
    Cx acc{0.0, 0.0};
    for (Index c = 0; c < nc; ++c) {
      acc += std::conj(maps[c * plane + p]) * x[c * plane + p];
    }
    out[p] = acc;
  }
}

void coil_expand(std::span<Cx const> maps, std::span<Cx const> v, Index nc, Index plane,
                 std::span<Cx> out) {
#pragma omp parallel for collapse(2) schedule(static)
  for (Index c = 0; c < nc; ++c) {
    for (Index p = 0; p < plane; ++p) {
      out[c * plane + p] = maps[c * plane + p] * v[p];
    }
  }
}

void hankel_forward(std::span<Cx const> z, HankelShape const &shape, std::span<Cx> out) {
  Index const rows = shape.rows();
  Index const cols = shape.cols();
  Index const py_n = shape.patches_y();
  Index const px_n = shape.patches_x();
  Index const ky = shape.dims.ky;
  Index const kx = shape.dims.kx;
  Index const wy = shape.wy;
  Index const wx = shape.wx;
#pragma omp parallel for schedule(static)
  for (Index col = 0; col < cols; ++col) {
    Index const c = col / (wy * wx);
    Index const dy = (col / wx) % wy;
    Index const dx = col % wx;
    Cx *dst = out.data() + col * rows;
    for (Index py = 0; py < py_n; ++py) {
      Cx const *src = z.data() + (c * ky + py + dy) * kx + dx;
      std::copy(src, src + px_n, dst + py * px_n);
    }
  }
}

void hankel_adjoint(std::span<Cx const> mat, HankelShape const &shape, std::span<Cx> z) {
  Index const rows = shape.rows();
  Index const py_n = shape.patches_y();
  Index const px_n = shape.patches_x();
  Index const ky = shape.dims.ky;
  Index const kx = shape.dims.kx;
  Index const wy = shape.wy;
  Index const wx = shape.wx;
#pragma omp parallel for collapse(2) schedule(static)
  for (Index c = 0; c < shape.dims.nc; ++c) {
    for (Index y = 0; y < ky; ++y) {
      Index const dy_lo = std::max<Index>(0, y - (py_n - 1));
      Index const dy_hi = std::min<Index>(wy - 1, y);
      for (Index x = 0; x < kx; ++x) {
        Index const dx_lo = std::max<Index>(0, x - (px_n - 1));
        Index const dx_hi = std::min<Index>(wx - 1, x);
        Cx acc{0.0, 0.0};
        for (Index dy = dy_lo; dy <= dy_hi; ++dy) {
          for (Index dx = dx_lo; dx <= dx_hi; ++dx) {
            Index const col = (c * wy + dy) * wx + dx;
            acc += mat[col * rows + (y - dy) * px_n + (x - dx)];
          }
        }
        z[(c * ky + y) * kx + x] = acc;
      }
    }
  }
}

void sos(std::span<Cx const> x, Index nc, Index plane, std::span<double> out) {
#pragma omp parallel for schedule(static)
  for (Index p = 0; p < plane; ++p) {
    double acc = 0.0;
    for (Index c = 0; c < nc; ++c) acc += std::norm(x[c * plane + p]);
    out[p] = std::sqrt(acc);
  }
}

} // namespace parallel

} // namespace akd::kernels
