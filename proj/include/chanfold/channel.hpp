#pragma once

#include "chanfold/linalg.hpp"

#include <optional>
#include <vector>

namespace chanfold {

// ---------------------------------------------------------------------------
// The three channel representations.
//
// A channel maps s x s to t x t matrices. Kraus operators A_i are t x s with
// sum_i A_i* A_i = I (trace preservation). The Choi state is stored
// normalized: C = (1/s) sum_i w_i w_i* with w_i = sum_k e_k (x) (A_i e_k),
// so that tr over the output factor gives I_s / s and tr C = 1. A
// Stinespring isometry stacks the Kraus operators vertically; its output
// space is ordered (environment, output) with the environment first.
// ---------------------------------------------------------------------------

struct KrausChannel {
  Index s = 0;  // input dimension
  Index t = 0;  // output dimension
  std::vector<Mat> ops;

  Index kraus_count() const { return static_cast<Index>(ops.size()); }
};

struct ChoiState {
  Index s = 0;
  Index t = 0;
  Mat matrix;  // st x st, Hermitian PSD, trace 1, tr_B = I/s
};

struct Isometry {
  Index s = 0;        // input dimension
  Index env_dim = 0;  // r, traced-out factor
  Index out_dim = 0;  // t
  Mat matrix;         // (env_dim * out_dim) x s

  Mat kraus_block(Index i) const {
    return matrix.middleRows(i * out_dim, out_dim);
  }
};

inline void validate_kraus(const KrausChannel &k, double tp_tol = 1e-10) {
  if (k.s <= 0 || k.t <= 0)
    throw input_error("KrausChannel: dimensions must be positive");
  if (k.ops.empty())
    throw input_error("KrausChannel: at least one Kraus operator required");
  Mat acc = Mat::Zero(k.s, k.s);
  for (const Mat &op : k.ops) {
    if (op.rows() != k.t || op.cols() != k.s)
      throw input_error("KrausChannel: every operator must be t x s");
    require_finite(op, "KrausChannel");
    acc += op.adjoint() * op;
  }
  if ((acc - Mat::Identity(k.s, k.s)).norm() > tp_tol)
    throw input_error("KrausChannel: sum A_i* A_i != I (not trace preserving)");
}

inline void validate_choi(const ChoiState &c, double tol = 1e-10,
                          double tol_psd = 1e-10) {
  const Index d = c.s * c.t;
  if (c.s <= 0 || c.t <= 0)
    throw input_error("ChoiState: dimensions must be positive");
  if (c.matrix.rows() != d || c.matrix.cols() != d)
    throw input_error("ChoiState: matrix must be st x st");
  require_finite(c.matrix, "ChoiState");
  if ((c.matrix - c.matrix.adjoint()).norm() >
      tol * std::max(1.0, c.matrix.norm()))
    throw input_error("ChoiState: matrix is not Hermitian");
  if (std::abs(c.matrix.trace() - Complex(1.0)) > tol)
    throw input_error("ChoiState: trace must be 1");
  HermEig eig = herm_eig(c.matrix, std::max(tol, 1e-10));
  const double lam_max = eig.eigenvalues.cwiseAbs().maxCoeff();
  if (eig.eigenvalues(0) < -tol_psd * lam_max)
    throw input_error("ChoiState: matrix is not positive semidefinite");
  Mat marginal = partial_trace(c.matrix, c.s, c.t, TracedFactor::second);
  if ((marginal - Mat::Identity(c.s, c.s) / double(c.s)).norm() > tol)
    throw input_error("ChoiState: tr_B C != I/s");
}

inline void validate_isometry(const Isometry &v, double tol = 1e-10) {
  if (v.s <= 0 || v.env_dim <= 0 || v.out_dim <= 0)
    throw input_error("Isometry: dimensions must be positive");
  if (v.matrix.rows() != v.env_dim * v.out_dim || v.matrix.cols() != v.s)
    throw input_error("Isometry: matrix must be (r*t) x s");
  require_finite(v.matrix, "Isometry");
  if ((v.matrix.adjoint() * v.matrix - Mat::Identity(v.s, v.s)).norm() > tol)
    throw input_error("Isometry: V*V != I");
}

// ---------------------------------------------------------------------------
// Building blocks shared by the conversions
// ---------------------------------------------------------------------------

/// w = sum_k e_k (x) (A e_k) on the (A', B) composite: w[k*t + b] = A[b,k].
inline Vec choi_vector(const Mat &op, Index s, Index t) {
  Vec w(s * t);
  for (Index k = 0; k < s; ++k)
    for (Index b = 0; b < t; ++b)
      w(k * t + b) = op(b, k);
  return w;
}

/// st x r matrix whose column i is vec(A_i); its rank is the Gram rank of
/// the Kraus family.
inline Mat kraus_stack(const std::vector<Mat> &ops) {
  if (ops.empty())
    throw input_error("kraus_stack: empty operator list");
  Mat stack(ops[0].size(), static_cast<Index>(ops.size()));
  for (std::size_t i = 0; i < ops.size(); ++i)
    stack.col(static_cast<Index>(i)) = vec(ops[i]);
  return stack;
}

// ---------------------------------------------------------------------------
// Conversions
// ---------------------------------------------------------------------------

inline ChoiState kraus_to_choi(const KrausChannel &k, double tp_tol = 1e-10) {
  validate_kraus(k, tp_tol);
  const Index d = k.s * k.t;
  Mat choi = Mat::Zero(d, d);
  for (const Mat &op : k.ops) {
    Vec w = choi_vector(op, k.s, k.t);
    choi += w * w.adjoint();
  }
  choi /= double(k.s);
  return ChoiState{k.s, k.t, std::move(choi)};
}

/// Minimal Kraus representation from the eigendecomposition of s*C.
/// Eigenvalues above rel_tol * lambda_max are kept, ordered descending;
/// negative eigenvalues beyond the PSD tolerance are rejected by validation.
inline KrausChannel choi_to_kraus(const ChoiState &c,
                                  double rel_tol = kDefaultRelTol,
                                  double validation_tol = 1e-10) {
  validate_choi(c, validation_tol, validation_tol);
  HermEig eig = herm_eig(double(c.s) * c.matrix, std::max(validation_tol, 1e-10));
  const Index d = c.s * c.t;
  const double lam_max = eig.eigenvalues(d - 1);
  if (lam_max <= 0.0)
    throw input_error("choi_to_kraus: spectrum has no positive part");
  KrausChannel k;
  k.s = c.s;
  k.t = c.t;
  for (Index idx = d - 1; idx >= 0; --idx) {
    const double lam = eig.eigenvalues(idx);
    if (lam <= rel_tol * lam_max)
      break;
    Vec w = std::sqrt(lam) * eig.eigenvectors.col(idx);
    Mat op(c.t, c.s);
    for (Index i = 0; i < c.s; ++i)
      for (Index b = 0; b < c.t; ++b)
        op(b, i) = w(i * c.t + b);
    k.ops.push_back(std::move(op));
  }
  return k;
}

/// Embedded maximally entangled vector (I (x) V)|gamma> on A' (x) C (x) B.
inline Vec stinespring_vector(const Mat &v, Index s) {
  Vec g(s * v.rows());
  for (Index k = 0; k < s; ++k)
    g.segment(k * v.rows(), v.rows()) = v.col(k);
  return g;
}

/// Choi state of the channel M -> tr_C (V M V*), environment traced out as
/// the first factor of the output space.
inline ChoiState stinespring_to_choi(const Isometry &v, double tol = 1e-10) {
  validate_isometry(v, tol);
  Vec g = stinespring_vector(v.matrix, v.s);
  Mat full = g * g.adjoint();
  Mat choi = trace_middle(full, v.s, v.env_dim, v.out_dim) / double(v.s);
  return ChoiState{v.s, v.out_dim, std::move(choi)};
}

// ---------------------------------------------------------------------------
// Adjoint (dual) channel
// ---------------------------------------------------------------------------

/// Kraus list {A_i*} of the adjoint map. The result is completely positive
/// and unital rather than trace preserving, so it is returned as a plain
/// operator list together with its unitality residual ||sum A_i A_i* - I||.
struct AdjointKraus {
  std::vector<Mat> ops;  // s x t operators
  double unitality_residual = 0.0;
};

inline AdjointKraus adjoint_channel(const KrausChannel &k,
                                    double tp_tol = 1e-10) {
  validate_kraus(k, tp_tol);
  AdjointKraus adj;
  Mat acc = Mat::Zero(k.s, k.s);
  for (const Mat &op : k.ops) {
    adj.ops.push_back(op.adjoint());
    acc += op.adjoint() * op;
  }
  adj.unitality_residual = (acc - Mat::Identity(k.s, k.s)).norm();
  return adj;
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

/// Channel of Kraus rank exactly r, sampled by splitting a Haar isometry
/// into r blocks. Draws whose blocks are numerically dependent are rejected
/// and resampled from a derived seed (dependence is non-generic).
inline KrausChannel random_channel(Index s, Index t, Index r,
                                   std::uint64_t seed,
                                   double rel_tol = kDefaultRelTol) {
  if (s <= 0 || t <= 0 || r <= 0)
    throw input_error("random_channel: dimensions must be positive");
  if (r > s * t)
    throw input_error("random_channel: requires r <= s*t");
  if (s > r * t)
    throw input_error("random_channel: requires s <= r*t");
  constexpr int kMaxAttempts = 16;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::uint64_t draw = attempt == 0 ? seed : derive_seed(seed, attempt);
    Mat v = haar_isometry(s, r * t, draw);
    KrausChannel k;
    k.s = s;
    k.t = t;
    for (Index i = 0; i < r; ++i)
      k.ops.push_back(v.middleRows(i * t, t));
    if (numerical_rank(kraus_stack(k.ops), rel_tol).rank == r)
      return k;
  }
  throw numeric_error("random_channel: failed to draw independent blocks");
}

/// The discard-and-prepare channel with Kraus operators A_i = psi e_i*.
/// Trace preservation is exact and the channel is extreme for any unit psi.
inline KrausChannel extreme_example(Index s, Index t, const Vec &psi) {
  if (s <= 0 || t <= 0 || psi.size() != t)
    throw input_error("extreme_example: psi must have length t");
  if (std::abs(psi.norm() - 1.0) > 1e-12)
    throw input_error("extreme_example: psi must be a unit vector");
  KrausChannel k;
  k.s = s;
  k.t = t;
  for (Index i = 0; i < s; ++i) {
    Mat op = Mat::Zero(t, s);
    op.col(i) = psi;
    k.ops.push_back(std::move(op));
  }
  return k;
}

// ---------------------------------------------------------------------------
// Equality and unitary freedom
// ---------------------------------------------------------------------------

/// Equality as channels: Frobenius distance of the Choi states.
inline bool channels_equal(const KrausChannel &k1, const KrausChannel &k2,
                           double tol = 1e-9) {
  if (k1.s != k2.s || k1.t != k2.t)
    throw input_error("channels_equal: dimension mismatch");
  return (kraus_to_choi(k1).matrix - kraus_to_choi(k2).matrix).norm() <= tol;
}

/// Recover the unitary mixing between two minimal Kraus representations of
/// the same channel: B_j = sum_i U_ji A_i. Returns nothing when the inputs
/// describe different channels or the verification residuals exceed tol.
inline std::optional<Mat> recover_mixing_unitary(const KrausChannel &k1,
                                                 const KrausChannel &k2,
                                                 double tol = 1e-9,
                                                 double rel_tol = kDefaultRelTol) {
  validate_kraus(k1);
  validate_kraus(k2);
  if (k1.s != k2.s || k1.t != k2.t)
    throw input_error("recover_mixing_unitary: dimension mismatch");
  Mat w1 = kraus_stack(k1.ops);
  Mat w2 = kraus_stack(k2.ops);
  if (numerical_rank(w1, rel_tol).rank != k1.kraus_count() ||
      numerical_rank(w2, rel_tol).rank != k2.kraus_count())
    throw input_error("recover_mixing_unitary: inputs must be minimal");
  if (k1.kraus_count() != k2.kraus_count())
    return std::nullopt;
  if (!channels_equal(k1, k2, tol))
    return std::nullopt;
  // W2 = W1 U^T for the mixing unitary U.
  Mat u = (w1.completeOrthogonalDecomposition().pseudoInverse() * w2)
              .transpose();
  const Index r = k1.kraus_count();
  if ((u.adjoint() * u - Mat::Identity(r, r)).norm() > tol)
    return std::nullopt;
  for (Index j = 0; j < r; ++j) {
    Mat mixed = Mat::Zero(k1.t, k1.s);
    for (Index i = 0; i < r; ++i)
      mixed += u(j, i) * k1.ops[i];
    if ((k2.ops[j] - mixed).norm() > tol)
      return std::nullopt;
  }
  return u;
}

}  // namespace chanfold
