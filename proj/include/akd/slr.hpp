#pragma once

#include <vector>

#include <Eigen/Core>

#include "akd/mask.hpp"
#include "akd/tensor.hpp"

namespace akd {

/// Patch size of the block-Hankel lifting; coils are stacked along columns.
struct HankelConfig {
  Index wy = 6;
  Index wx = 6;
};

/// Valid-patch block-Hankel matrix: one row per patch position
/// (py * (kx - wx + 1) + px), one column per (coil, dy, dx).
Eigen::MatrixXcd hankelize(KSpaceTensor const &z, HankelConfig const &cfg);

/// Adjoint of hankelize for tensors of shape `dims`.
KSpaceTensor hankel_adjoint(Eigen::MatrixXcd const &mat, Dims const &dims, HankelConfig const &cfg);

/// Copy of the samples inside `region`.
KSpaceTensor extract_region(KSpaceTensor const &z, Rect const &region);

/// Orthonormal nullspace basis of the calibration Hankel matrix, one filter
/// per column (length nc * wy * wx).
struct AnnihilationFilter {
  Eigen::MatrixXcd filters;
  HankelConfig window;
  Index nc = 1;
  double rank_threshold = 0.05;
  /// Set when no singular value fell below the threshold; the SLR term is then inert.
  bool empty_nullspace = false;

  Index count() const { return filters.cols(); }
};

/// SVD of H(acs); keeps the right singular vectors whose singular value is
/// below rank_threshold * sigma_max (directions beyond the row count have
/// singular value zero).
AnnihilationFilter estimate_annihilation(KSpaceTensor const &acs, HankelConfig const &cfg,
                                         double rank_threshold);

/// ||H(z) N||_F^2
double annihilation_energy(KSpaceTensor const &z, AnnihilationFilter const &filter);

/// z -> H*(H(z) N N^H) on a fixed grid. Each filter acts on the lifting as a
/// circular correlation restricted to valid patches, so the operator is
/// applied with per-filter FFTs instead of forming the Hankel matrix. When
/// the nullspace is more than half the columns, the complement basis V is
/// used through H*H - H*(H(.) V V^H), H*H being a per-pixel patch count.
class AnnihilationOperator {
public:
  AnnihilationOperator(AnnihilationFilter const &filter, Dims dims);

  KSpaceTensor apply(KSpaceTensor const &z) const;
  /// True when the nullspace is empty and apply() returns zero.
  bool inert() const { return inert_; }
  Dims dims() const { return dims_; }
  AnnihilationFilter const &filter() const { return filter_; }

private:
  AnnihilationFilter filter_;
  Dims dims_;
  bool inert_ = true;
  bool complement_ = false;
  /// Spectra of the conjugated basis vectors, one (nc x plane) block per vector.
  std::vector<std::vector<Cx>> spectra_;
  std::vector<double> coverage_;
};

struct SlrOptions {
  double lambda = 1.0;
  int cg_iters = 10;
  double cg_tol = 1e-6;
  /// Evaluate the objective after every CG iteration (costs one extra lifting each).
  bool record_objective = false;
};

struct SlrResult {
  KSpaceTensor z;
  int iterations = 0;
  double relative_residual = 0.0;
  /// Objective at the starting point followed by one value per iteration.
  std::vector<double> objective_trace;
};

/// 1/2 ||M z - y||^2 + ||H(z) N||_F^2 + lambda ||z - z_prime||^2
double slr_objective(KSpaceTensor const &z, KSpaceTensor const &z_prime, KSpaceTensor const &y,
                     SamplingMask const &mask, AnnihilationFilter const &filter, double lambda);

/// Minimizes slr_objective by conjugate gradients on the normal equations
///   (M + 2 H*(H(.) N N^H) + 2 lambda I) z = M y + 2 lambda z_prime,
/// started at z_prime. Throws NumericalFailure if the residual grows for 5
/// consecutive iterations.
SlrResult slr_correct(KSpaceTensor const &z_prime, KSpaceTensor const &y, SamplingMask const &mask,
                      AnnihilationFilter const &filter, SlrOptions const &opts);

/// Same with a prebuilt operator, for repeated solves on one grid.
SlrResult slr_correct(KSpaceTensor const &z_prime, KSpaceTensor const &y, SamplingMask const &mask,
                      AnnihilationOperator const &op, SlrOptions const &opts);

} // namespace akd
