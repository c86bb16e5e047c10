#pragma once

#include "chanfold/channel.hpp"

namespace chanfold {

// ---------------------------------------------------------------------------
// Dimension counts for the manifold of rank-r Choi states, verified
// numerically by pushing a Stiefel tangent basis through the differential of
// the isometry -> Choi map and measuring the rank of the image.
// ---------------------------------------------------------------------------

struct DimensionReport {
  Index s = 0;
  Index t = 0;
  Index r = 0;
  Index formula_dim = 0;
  Index numeric_dim = 0;
  std::uint64_t point_seed = 0;
  double margin = 0.0;  // rank margin of the stacked pushforward matrix
};

/// Dimension 2str - s^2 - r^2 of the manifold of rank-r Choi states
/// (equivalently, of Kraus-rank-r channels) from dimension s to t.
inline Index manifold_dim(Index s, Index t, Index r) {
  if (s <= 0 || t <= 0 || r <= 0)
    throw input_error("manifold_dim: dimensions must be positive");
  if (s > r * t)
    throw input_error("manifold_dim: requires s <= r*t");
  if (r > s * t)
    throw input_error("manifold_dim: requires r <= s*t");
  return 2 * s * t * r - s * s - r * r;
}

namespace detail {

/// Real coordinates of a Hermitian matrix: diagonal, then (re, im) of the
/// strict upper triangle. A real-linear bijection onto R^{s^2}.
inline RVec herm_coords(const Mat &h) {
  const Index s = h.rows();
  RVec out(s * s);
  Index pos = 0;
  for (Index i = 0; i < s; ++i)
    out(pos++) = h(i, i).real();
  for (Index i = 0; i < s; ++i)
    for (Index j = i + 1; j < s; ++j) {
      out(pos++) = h(i, j).real();
      out(pos++) = h(i, j).imag();
    }
  return out;
}

}  // namespace detail

/// Real-orthonormal basis of the tangent space {X : V*X + X*V = 0} of the
/// Stiefel manifold at V, as a kernel of the constraint map onto Hermitian
/// s x s matrices. Always returns exactly 2s(rt) - s^2 directions of unit
/// Frobenius norm.
inline std::vector<Mat> stiefel_tangent_basis(const Isometry &v,
                                              double rel_tol = kDefaultRelTol) {
  validate_isometry(v);
  const Index n = v.env_dim * v.out_dim;
  const Index s = v.s;
  const Index ambient = 2 * n * s;
  RMat constraint(s * s, ambient);
  for (Index q = 0; q < ambient; ++q) {
    RVec e = RVec::Zero(ambient);
    e(q) = 1.0;
    Mat x = unrealvec(e, n, s);
    constraint.col(q) =
        detail::herm_coords(v.matrix.adjoint() * x + x.adjoint() * v.matrix);
  }
  Eigen::JacobiSVD<RMat> svd(constraint, Eigen::ComputeFullV);
  RankReport rank = detail::rank_from_singular_values(svd.singularValues(),
                                                      rel_tol, 0.0);
  if (rank.rank != s * s)
    throw numeric_error("stiefel_tangent_basis: constraint map is rank "
                        "deficient at the given point");
  std::vector<Mat> basis;
  basis.reserve(ambient - s * s);
  for (Index k = s * s; k < ambient; ++k)
    basis.push_back(unrealvec(svd.matrixV().col(k), n, s));
  return basis;
}

/// Differential of the isometry -> Choi map at V in direction X:
/// (1/s) tr_C [ (I (x) X) gg* (I (x) V)* + (I (x) V) gg* (I (x) X)* ]
/// with g the unnormalized maximally entangled vector. Exact bilinear form,
/// no finite differences.
inline Mat pushforward_T(const Isometry &v, const Mat &x) {
  validate_isometry(v);
  if (x.rows() != v.matrix.rows() || x.cols() != v.matrix.cols())
    throw input_error("pushforward_T: direction shape mismatch");
  require_finite(x, "pushforward_T");
  Vec gv = stinespring_vector(v.matrix, v.s);
  Vec gx = stinespring_vector(x, v.s);
  Mat full = gx * gv.adjoint() + gv * gx.adjoint();
  return trace_middle(full, v.s, v.env_dim, v.out_dim) / double(v.s);
}

/// Samples a generic rank-r point, pushes the whole Stiefel tangent basis
/// through the differential and reports the rank of the image alongside the
/// closed-form dimension. The two agree at generic points.
inline DimensionReport numeric_choi_manifold_dim(Index s, Index t, Index r,
                                                 std::uint64_t seed,
                                                 double rel_tol = kDefaultRelTol) {
  DimensionReport report;
  report.s = s;
  report.t = t;
  report.r = r;
  report.point_seed = seed;
  report.formula_dim = manifold_dim(s, t, r);

  constexpr int kMaxAttempts = 16;
  Isometry v;
  bool found = false;
  for (int attempt = 0; attempt < kMaxAttempts && !found; ++attempt) {
    std::uint64_t draw = attempt == 0 ? seed : derive_seed(seed, attempt);
    v = Isometry{s, r, t, haar_isometry(s, r * t, draw)};
    std::vector<Mat> blocks;
    for (Index i = 0; i < r; ++i)
      blocks.push_back(v.kraus_block(i));
    found = numerical_rank(kraus_stack(blocks), rel_tol).rank == r;
  }
  if (!found)
    throw numeric_error("numeric_choi_manifold_dim: no minimal point found");

  std::vector<Mat> basis = stiefel_tangent_basis(v, rel_tol);
  RMat image(2 * s * t * s * t, static_cast<Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k)
    image.col(static_cast<Index>(k)) = realvec(pushforward_T(v, basis[k]));
  // Inputs are unit-scale, so rel_tol doubles as an absolute noise floor;
  // without it, gauge directions that cancel to rounding error would
  // register as rank on otherwise zero maps.
  RankReport rank = numerical_rank_real(image, rel_tol, rel_tol);
  report.numeric_dim = rank.rank;
  report.margin = rank.margin;
  return report;
}

/// Numerical dimension of the manifold of rank-r PSD s x s matrices at a
/// random well-conditioned point p = A E_r A*, via the span of
/// {D E_r A* + A E_r D*}. Equals 2sr - r^2.
inline Index psd_tangent_dim(Index s, Index r, std::uint64_t seed,
                             double rel_tol = kDefaultRelTol) {
  if (r < 1 || r > s)
    throw input_error("psd_tangent_dim: requires 1 <= r <= s");
  Mat e_r = Mat::Zero(s, s);
  for (Index i = 0; i < r; ++i)
    e_r(i, i) = 1.0;

  constexpr int kMaxAttempts = 16;
  constexpr double kMaxCondition = 1e6;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::uint64_t draw = attempt == 0 ? seed : derive_seed(seed, attempt);
    std::mt19937_64 gen(draw);
    Mat a = randn_complex(s, s, gen);
    Eigen::JacobiSVD<Mat> svd(a);
    const double smin = svd.singularValues()(s - 1);
    if (smin <= 0.0 || svd.singularValues()(0) / smin > kMaxCondition)
      continue;
    const Index samples = 2 * s * s;
    RMat image(2 * s * s, samples);
    for (Index k = 0; k < samples; ++k) {
      Mat delta = randn_complex(s, s, gen);
      Mat tangent = delta * e_r * a.adjoint() + a * e_r * delta.adjoint();
      image.col(k) = realvec(tangent);
    }
    return numerical_rank_real(image, rel_tol, rel_tol).rank;
  }
  throw numeric_error("psd_tangent_dim: no well-conditioned point found");
}

}  // namespace chanfold
