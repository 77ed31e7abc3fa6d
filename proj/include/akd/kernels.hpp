#pragma once

// Data-parallel inner loops. Every kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::parallel with identical
// results; library code calls the parallel ones. Arrays are coil-major,
// row-major planes of size ky * kx.

#include <span>

#include "akd/tensor.hpp"

namespace akd::kernels {

/// Geometry of a valid (non-wrapping) block-Hankel lifting.
struct HankelShape {
  Dims dims;
  Index wy = 1;
  Index wx = 1;

  Index patches_y() const { return dims.ky - wy + 1; }
  Index patches_x() const { return dims.kx - wx + 1; }
  Index rows() const { return patches_y() * patches_x(); }
  Index cols() const { return dims.nc * wy * wx; }
};

namespace serial {

/// out[p] = sum_c conj(s_c[p]) x_c[p]
void coil_combine(std::span<Cx const> maps, std::span<Cx const> x, Index nc, Index plane,
                  std::span<Cx> out);
/// out_c[p] = s_c[p] v[p]
void coil_expand(std::span<Cx const> maps, std::span<Cx const> v, Index nc, Index plane,
                 std::span<Cx> out);
/// Column-major (rows x cols) Hankel matrix of z.
void hankel_forward(std::span<Cx const> z, HankelShape const &shape, std::span<Cx> out);
/// Adjoint of hankel_forward: scatter-adds matrix entries back onto the grid.
void hankel_adjoint(std::span<Cx const> mat, HankelShape const &shape, std::span<Cx> z);
/// out[p] = sqrt(sum_c |x_c[p]|^2)
void sos(std::span<Cx const> x, Index nc, Index plane, std::span<double> out);

} // namespace serial

namespace parallel {

void coil_combine(std::span<Cx const> maps, std::span<Cx const> x, Index nc, Index plane,
                  std::span<Cx> out);
void coil_expand(std::span<Cx const> maps, std::span<Cx const> v, Index nc, Index plane,
                 std::span<Cx> out);
void hankel_forward(std::span<Cx const> z, HankelShape const &shape, std::span<Cx> out);
/// Gather form of the adjoint (one writer per grid sample).
void hankel_adjoint(std::span<Cx const> mat, HankelShape const &shape, std::span<Cx> z);
void sos(std::span<Cx const> x, Index nc, Index plane, std::span<double> out);

} // namespace parallel

} // namespace akd::kernels
