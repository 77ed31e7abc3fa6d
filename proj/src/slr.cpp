#include "akd/slr.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "akd/fft.hpp"
#include "akd/kernels.hpp"

namespace akd {

namespace {

kernels::HankelShape shape_of(Dims const &d, HankelConfig const &cfg) {
  require(cfg.wy >= 1 && cfg.wx >= 1 && cfg.wy <= d.ky && cfg.wx <= d.kx,
          ErrorKind::InvalidArgument, "Hankel window does not fit the grid");
  return kernels::HankelShape{d, cfg.wy, cfg.wx};
}

void check_filter(Dims const &d, AnnihilationFilter const &filter) {
  if (filter.count() == 0) return;
  require(filter.nc == d.nc && filter.filters.rows() == d.nc * filter.window.wy * filter.window.wx,
          ErrorKind::DimensionMismatch, "annihilation filter does not match the data shape");
}

double real_inner(KSpaceTensor const &a, KSpaceTensor const &b) { return inner(a, b).real(); }

} // namespace

Eigen::MatrixXcd hankelize(KSpaceTensor const &z, HankelConfig const &cfg) {
  auto const shape = shape_of(z.dims(), cfg);
  Eigen::MatrixXcd mat(shape.rows(), shape.cols());
  kernels::parallel::hankel_forward(z.span(), shape, std::span<Cx>(mat.data(), static_cast<std::size_t>(mat.size())));
  return mat;
}

KSpaceTensor hankel_adjoint(Eigen::MatrixXcd const &mat, Dims const &dims, HankelConfig const &cfg) {
  auto const shape = shape_of(dims, cfg);
  require(mat.rows() == shape.rows() && mat.cols() == shape.cols(), ErrorKind::DimensionMismatch,
          "hankel_adjoint: matrix shape does not match the lifting");
  KSpaceTensor z(dims);
  kernels::parallel::hankel_adjoint(
      std::span<Cx const>(mat.data(), static_cast<std::size_t>(mat.size())), shape, z.span());
  return z;
}

KSpaceTensor extract_region(KSpaceTensor const &z, Rect const &region) {
  require(!region.empty() && region.y0 >= 0 && region.x0 >= 0 && region.y1 <= z.ky() &&
              region.x1 <= z.kx(),
          ErrorKind::InvalidArgument, "extract_region: region outside grid");
  KSpaceTensor out(Dims{z.nc(), region.height(), region.width()});
  for (Index c = 0; c < z.nc(); ++c) {
    for (Index y = 0; y < region.height(); ++y) {
      for (Index x = 0; x < region.width(); ++x) out(c, y, x) = z(c, region.y0 + y, region.x0 + x);
    }
  }
  return out;
}

AnnihilationFilter estimate_annihilation(KSpaceTensor const &acs, HankelConfig const &cfg,
                                         double rank_threshold) {
  require(rank_threshold > 0.0 && rank_threshold < 1.0, ErrorKind::InvalidArgument,
          "estimate_annihilation: rank_threshold must lie in (0, 1)");
  require(acs.ky() >= cfg.wy && acs.kx() >= cfg.wx, ErrorKind::InvalidArgument,
          "estimate_annihilation: ACS smaller than the Hankel window");
  Eigen::MatrixXcd const h = hankelize(acs, cfg);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(h, Eigen::ComputeFullV);
  auto const &sv = svd.singularValues();
  double const smax = sv.size() > 0 ? sv(0) : 0.0;
  require(smax > 0.0, ErrorKind::InvalidArgument, "estimate_annihilation: ACS is identically zero");

  Index const cols = h.cols();
  std::vector<Index> keep;
  for (Index j = 0; j < cols; ++j) {
    double const s = j < sv.size() ? sv(j) : 0.0;
    if (s < rank_threshold * smax) keep.push_back(j);
  }
  AnnihilationFilter filter;
  filter.window = cfg;
  filter.nc = acs.nc();
  filter.rank_threshold = rank_threshold;
  filter.filters.resize(cols, static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    filter.filters.col(static_cast<Index>(k)) = svd.matrixV().col(keep[k]);
  }
  filter.empty_nullspace = keep.empty();
  return filter;
}

double annihilation_energy(KSpaceTensor const &z, AnnihilationFilter const &filter) {
  if (filter.count() == 0) return 0.0;
  check_filter(z.dims(), filter);
  return (hankelize(z, filter.window) * filter.filters).squaredNorm();
}

AnnihilationOperator::AnnihilationOperator(AnnihilationFilter const &filter, Dims dims)
    : filter_(filter), dims_(dims) {
  validate_dims(dims);
  check_filter(dims, filter);
  Index const cols = dims.nc * filter.window.wy * filter.window.wx;
  Index const r = filter.count();
  if (r == 0) return;
  auto const shape = shape_of(dims, filter.window);
  inert_ = false;

  Eigen::MatrixXcd basis;
  if (2 * r <= cols) {
    basis = filter.filters;
  } else {
    complement_ = true;
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(filter.filters);
    Eigen::MatrixXcd q = qr.householderQ();
    basis = q.rightCols(cols - r);
    coverage_.assign(static_cast<std::size_t>(dims.plane()), 0.0);
    for (Index y = 0; y < dims.ky; ++y) {
      Index const ny = std::min(y, shape.patches_y() - 1) - std::max<Index>(0, y - filter.window.wy + 1) + 1;
      for (Index x = 0; x < dims.kx; ++x) {
        Index const nx = std::min(x, shape.patches_x() - 1) - std::max<Index>(0, x - filter.window.wx + 1) + 1;
        coverage_[static_cast<std::size_t>(y * dims.kx + x)] = static_cast<double>(std::max<Index>(ny, 0) * std::max<Index>(nx, 0));
      }
    }
  }

  Index const plane = dims.plane();
  spectra_.resize(static_cast<std::size_t>(basis.cols()));
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < basis.cols(); ++j) {
    auto &spec = spectra_[static_cast<std::size_t>(j)];
    spec.assign(static_cast<std::size_t>(dims.nc * plane), Cx{0.0, 0.0});
    for (Index c = 0; c < dims.nc; ++c) {
      std::span<Cx> block(spec.data() + c * plane, static_cast<std::size_t>(plane));
      for (Index dy = 0; dy < filter.window.wy; ++dy) {
        for (Index dx = 0; dx < filter.window.wx; ++dx) {
          Index const col = (c * filter.window.wy + dy) * filter.window.wx + dx;
          block[static_cast<std::size_t>(dy * dims.kx + dx)] = std::conj(basis(col, j));
        }
      }
      dft2_inplace(block, dims.ky, dims.kx, false);
    }
  }
}

KSpaceTensor AnnihilationOperator::apply(KSpaceTensor const &z) const {
  require(z.dims() == dims_, ErrorKind::DimensionMismatch, "annihilation operator: grid mismatch");
  KSpaceTensor out(dims_);
  if (inert_) return out;
  Index const nc = dims_.nc;
  Index const plane = dims_.plane();
  Index const py = dims_.ky - filter_.window.wy + 1;
  Index const px = dims_.kx - filter_.window.wx + 1;
  double const inv = 1.0 / static_cast<double>(plane);

  std::vector<Cx> spectrum(z.values());
  for (Index c = 0; c < nc; ++c) {
    dft2_inplace(std::span<Cx>(spectrum.data() + c * plane, static_cast<std::size_t>(plane)), dims_.ky, dims_.kx, false);
  }

  // Per-thread partial sums, combined in thread order so results do not
  // depend on scheduling.
  int const threads = omp_get_max_threads();
  std::vector<std::vector<Cx>> partial(static_cast<std::size_t>(threads));
  Index const nbasis = static_cast<Index>(spectra_.size());
#pragma omp parallel num_threads(threads)
  {
    auto &acc = partial[static_cast<std::size_t>(omp_get_thread_num())];
    acc.assign(static_cast<std::size_t>(nc * plane), Cx{0.0, 0.0});
    std::vector<Cx> work(static_cast<std::size_t>(plane));
#pragma omp for schedule(static)
    for (Index j = 0; j < nbasis; ++j) {
      auto const &spec = spectra_[static_cast<std::size_t>(j)];
      std::fill(work.begin(), work.end(), Cx{0.0, 0.0});
      for (Index c = 0; c < nc; ++c) {
        for (Index p = 0; p < plane; ++p) work[static_cast<std::size_t>(p)] += spectrum[static_cast<std::size_t>(c * plane + p)] * std::conj(spec[static_cast<std::size_t>(c * plane + p)]);
      }
      dft2_inplace(work, dims_.ky, dims_.kx, true);
      for (Index y = 0; y < dims_.ky; ++y) {
        for (Index x = 0; x < dims_.kx; ++x) {
          auto &v = work[static_cast<std::size_t>(y * dims_.kx + x)];
          v = (y < py && x < px) ? v * inv : Cx{0.0, 0.0};
        }
      }
      dft2_inplace(work, dims_.ky, dims_.kx, false);
      for (Index c = 0; c < nc; ++c) {
        for (Index p = 0; p < plane; ++p) acc[static_cast<std::size_t>(c * plane + p)] += work[static_cast<std::size_t>(p)] * spec[static_cast<std::size_t>(c * plane + p)];
      }
    }
  }
  std::vector<Cx> total(static_cast<std::size_t>(nc * plane), Cx{0.0, 0.0});
  for (auto const &acc : partial) {
    if (acc.empty()) continue;
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += acc[i];
  }
  for (Index c = 0; c < nc; ++c) {
    std::span<Cx> block(total.data() + c * plane, static_cast<std::size_t>(plane));
    dft2_inplace(block, dims_.ky, dims_.kx, true);
    for (Index p = 0; p < plane; ++p) {
      Cx const projected = block[static_cast<std::size_t>(p)] * inv;
      out[c * plane + p] = complement_ ? z[c * plane + p] * coverage_[static_cast<std::size_t>(p)] - projected : projected;
    }
  }
  return out;
}

double slr_objective(KSpaceTensor const &z, KSpaceTensor const &z_prime, KSpaceTensor const &y,
                     SamplingMask const &mask, AnnihilationFilter const &filter, double lambda) {
  KSpaceTensor residual = mask.apply(z);
  residual -= y;
  return 0.5 * squared_norm(residual) + annihilation_energy(z, filter) +
         lambda * squared_norm(z - z_prime);
}

SlrResult slr_correct(KSpaceTensor const &z_prime, KSpaceTensor const &y, SamplingMask const &mask,
                      AnnihilationFilter const &filter, SlrOptions const &opts) {
  check_filter(y.dims(), filter);
  return slr_correct(z_prime, y, mask, AnnihilationOperator(filter, y.dims()), opts);
}

SlrResult slr_correct(KSpaceTensor const &z_prime, KSpaceTensor const &y, SamplingMask const &mask,
                      AnnihilationOperator const &op, SlrOptions const &opts) {
  require(opts.lambda >= 0.0 && std::isfinite(opts.lambda), ErrorKind::InvalidArgument,
          "slr_correct: lambda must be >= 0");
  require(opts.cg_iters >= 0, ErrorKind::InvalidArgument, "slr_correct: cg_iters must be >= 0");
  require(z_prime.dims() == y.dims(), ErrorKind::DimensionMismatch, "slr_correct: z' and y differ in shape");
  require(op.dims() == y.dims(), ErrorKind::DimensionMismatch, "slr_correct: operator grid differs from data");
  AnnihilationFilter const &filter = op.filter();
  auto normal = [&](KSpaceTensor const &x) {
    KSpaceTensor out = mask.apply(x);
    if (!op.inert()) out.axpy(2.0, op.apply(x));
    out.axpy(2.0 * opts.lambda, x);
    return out;
  };

  KSpaceTensor rhs = mask.apply(y);
  rhs.axpy(2.0 * opts.lambda, z_prime);
  double const rhs_norm = norm(rhs);

  SlrResult result{z_prime, 0, 0.0, {}};
  KSpaceTensor &x = result.z;
  KSpaceTensor r = rhs - normal(x);
  KSpaceTensor p = r;
  double rr = real_inner(r, r);
  double const scale = rhs_norm > 0.0 ? rhs_norm : 1.0;
  result.relative_residual = std::sqrt(rr) / scale;
  if (opts.record_objective) {
    result.objective_trace.push_back(slr_objective(x, z_prime, y, mask, filter, opts.lambda));
  }

  int growth = 0;
  double previous = std::sqrt(rr);
  for (int it = 0; it < opts.cg_iters && result.relative_residual > opts.cg_tol; ++it) {
    KSpaceTensor const ap = normal(p);
    double const pap = real_inner(p, ap);
    if (!(pap > 0.0)) break; // direction of zero curvature: nothing left to reduce
    double const alpha = rr / pap;
    x.axpy(alpha, p);
    r.axpy(-alpha, ap);
    double const rr_next = real_inner(r, r);
    p *= rr_next / rr;
    p += r;
    rr = rr_next;
    result.iterations = it + 1;
    double const current = std::sqrt(rr);
    result.relative_residual = current / scale;
    if (opts.record_objective) {
      result.objective_trace.push_back(slr_objective(x, z_prime, y, mask, filter, opts.lambda));
    }
    if (!std::isfinite(current)) {
      fail(ErrorKind::NumericalFailure, "slr_correct: non-finite CG residual");
    }
    growth = current > previous ? growth + 1 : 0;
    if (growth >= 5) {
      fail(ErrorKind::NumericalFailure, "slr_correct: CG residual grew for 5 consecutive iterations");
    }
    previous = current;
  }
  return result;
}

} // namespace akd
