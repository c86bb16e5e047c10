#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chanfold {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown when an input violates a documented precondition or invariant.
/// `path` locates the offending field for inputs parsed from documents.
class input_error : public std::runtime_error {
public:
  explicit input_error(std::string message, std::string path = "")
      : std::runtime_error(std::move(message)), path_(std::move(path)) {}
  const std::string &path() const { return path_; }

private:
  std::string path_;
};

/// Internal numerical failure (resampling exhausted, null space not found).
class numeric_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultRelTol = 1e-10;

inline void require_finite(const Mat &m, const std::string &what) {
  if (!m.allFinite())
    throw input_error(what + ": entries must be finite");
}

// ---------------------------------------------------------------------------
// Singular-value rank decisions
// ---------------------------------------------------------------------------

/// Outcome of a numerical rank decision. The full spectrum is kept so
/// borderline inputs can be audited instead of silently classified.
struct RankReport {
  Index rank = 0;
  std::vector<double> singular_values;  // descending
  double threshold = 0.0;               // absolute cutoff actually applied
  double margin = 0.0;                  // smallest retained sv / largest sv
};

namespace detail {

inline RankReport rank_from_singular_values(const RVec &sv, double rel_tol,
                                            double abs_floor) {
  RankReport report;
  report.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double largest = sv.size() > 0 ? sv(0) : 0.0;
  report.threshold = std::max(rel_tol * largest, abs_floor);
  for (Index k = 0; k < sv.size(); ++k)
    if (sv(k) > report.threshold)
      ++report.rank;
  report.margin =
      report.rank > 0 && largest > 0.0 ? sv(report.rank - 1) / largest : 0.0;
  return report;
}

}  // namespace detail

/// Rank via SVD with a relative cutoff: rank = #{sigma_k > rel_tol * sigma_1}.
/// `abs_floor` additionally discards singular values below an absolute level;
/// dimension estimators use it to keep pure numerical noise (finite-difference
/// residue, gauge-direction cancellation) from registering as rank.
inline RankReport numerical_rank(const Mat &m, double rel_tol = kDefaultRelTol,
                                 double abs_floor = 0.0) {
  if (m.size() == 0)
    throw input_error("numerical_rank: empty matrix");
  require_finite(m, "numerical_rank");
  Eigen::JacobiSVD<Mat> svd(m);
  return detail::rank_from_singular_values(svd.singularValues(), rel_tol,
                                           abs_floor);
}

/// Rank of a real matrix (stacked real Jacobians and coordinate systems).
inline RankReport numerical_rank_real(const RMat &m,
                                      double rel_tol = kDefaultRelTol,
                                      double abs_floor = 0.0) {
  if (m.size() == 0)
    throw input_error("numerical_rank: empty matrix");
  if (!m.allFinite())
    throw input_error("numerical_rank: entries must be finite");
  Eigen::JacobiSVD<RMat> svd(m);
  return detail::rank_from_singular_values(svd.singularValues(), rel_tol,
                                           abs_floor);
}

// ---------------------------------------------------------------------------
// Tensor-product index conventions
//
// Composite indices are row-major on (factor1, factor2): a state |i>|j> of a
// d1 x d2 product space sits at index i*d2 + j. Every tensor-product and
// partial-trace routine in the library uses this convention.
// ---------------------------------------------------------------------------

inline Mat kron(const Mat &a, const Mat &b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

enum class TracedFactor { first, second };

/// Partial trace of a square matrix on a d1 x d2 product space.
/// which = second:  N[i,j] = sum_b M[(i*d2+b),(j*d2+b)]   (d1 x d1)
/// which = first:   N[b,c] = sum_i M[(i*d2+b),(i*d2+c)]   (d2 x d2)
inline Mat partial_trace(const Mat &m, Index d1, Index d2, TracedFactor which) {
  if (d1 <= 0 || d2 <= 0 || m.rows() != m.cols() || m.rows() != d1 * d2)
    throw input_error("partial_trace: matrix size must equal d1*d2");
  require_finite(m, "partial_trace");
  if (which == TracedFactor::second) {
    Mat out = Mat::Zero(d1, d1);
    for (Index i = 0; i < d1; ++i)
      for (Index j = 0; j < d1; ++j)
        for (Index b = 0; b < d2; ++b)
          out(i, j) += m(i * d2 + b, j * d2 + b);
    return out;
  }
  Mat out = Mat::Zero(d2, d2);
  for (Index b = 0; b < d2; ++b)
    for (Index c = 0; c < d2; ++c)
      for (Index i = 0; i < d1; ++i)
        out(b, c) += m(i * d2 + b, i * d2 + c);
  return out;
}

/// Trace out the middle factor of a d1 x d2 x d3 product space.
inline Mat trace_middle(const Mat &m, Index d1, Index d2, Index d3) {
  if (m.rows() != m.cols() || m.rows() != d1 * d2 * d3)
    throw input_error("trace_middle: matrix size must equal d1*d2*d3");
  Mat out = Mat::Zero(d1 * d3, d1 * d3);
  for (Index a = 0; a < d1; ++a)
    for (Index b = 0; b < d3; ++b)
      for (Index a2 = 0; a2 < d1; ++a2)
        for (Index b2 = 0; b2 < d3; ++b2) {
          Complex acc = 0.0;
          for (Index c = 0; c < d2; ++c)
            acc += m(a * d2 * d3 + c * d3 + b, a2 * d2 * d3 + c * d3 + b2);
          out(a * d3 + b, a2 * d3 + b2) = acc;
        }
  return out;
}

// ---------------------------------------------------------------------------
// Vectorization (column-stacking: vec(M)[j*rows + i] = M[i,j])
// ---------------------------------------------------------------------------

inline Vec vec(const Mat &m) {
  return Eigen::Map<const Vec>(m.data(), m.size());
}

inline Mat unvec(const Vec &v, Index rows, Index cols) {
  if (v.size() != rows * cols)
    throw input_error("unvec: size mismatch");
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

/// Real coordinates of a complex matrix: [Re(vec M); Im(vec M)].
inline RVec realvec(const Mat &m) {
  RVec out(2 * m.size());
  out.head(m.size()) = Eigen::Map<const Vec>(m.data(), m.size()).real();
  out.tail(m.size()) = Eigen::Map<const Vec>(m.data(), m.size()).imag();
  return out;
}

inline Mat unrealvec(const RVec &v, Index rows, Index cols) {
  if (v.size() != 2 * rows * cols)
    throw input_error("unrealvec: size mismatch");
  Vec c = v.head(rows * cols).cast<Complex>() +
          Complex(0, 1) * v.tail(rows * cols).cast<Complex>();
  return Eigen::Map<const Mat>(c.data(), rows, cols);
}

// ---------------------------------------------------------------------------
// Seeded sampling
// ---------------------------------------------------------------------------

/// Deterministic stream split so resampling never reuses a caller's seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Mat randn_complex(Index rows, Index cols, std::mt19937_64 &gen) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Mat out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      out(i, j) = Complex(dist(gen), dist(gen));
  return out;
}

/// Haar-random isometry from dimension s into dimension n, via QR of a
/// complex Gaussian matrix. Plain QR is not Haar: each column of Q is
/// divided by the phase of the matching R diagonal entry to remove the
/// phase ambiguity of the factorization.
inline Mat haar_isometry(Index in_dim, Index out_dim, std::uint64_t seed) {
  if (in_dim <= 0 || out_dim < in_dim)
    throw input_error("haar_isometry: requires 1 <= in_dim <= out_dim");
  std::mt19937_64 gen(seed);
  Mat g = randn_complex(out_dim, in_dim, gen);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(out_dim, in_dim);
  Mat r = qr.matrixQR().topRows(in_dim).triangularView<Eigen::Upper>();
  for (Index k = 0; k < in_dim; ++k) {
    Complex d = r(k, k);
    double a = std::abs(d);
    if (a > 0.0)
      q.col(k) *= std::conj(d) / a;
  }
  return q;
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition
// ---------------------------------------------------------------------------

struct HermEig {
  RVec eigenvalues;  // ascending
  Mat eigenvectors;  // columns, orthonormal
};

/// Eigendecomposition of a Hermitian matrix. The input is rejected if it is
/// non-Hermitian beyond herm_tol * ||M||_F and symmetrized before the solve.
inline HermEig herm_eig(const Mat &m, double herm_tol = kDefaultRelTol) {
  if (m.rows() != m.cols())
    throw input_error("herm_eig: matrix must be square");
  require_finite(m, "herm_eig");
  const double scale = m.norm();
  if ((m - m.adjoint()).norm() > herm_tol * scale)
    throw input_error("herm_eig: matrix is not Hermitian within tolerance");
  Mat sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> solver(sym);
  if (solver.info() != Eigen::Success)
    throw numeric_error("herm_eig: eigendecomposition failed");
  return HermEig{solver.eigenvalues(), solver.eigenvectors()};
}

// ---------------------------------------------------------------------------
// Deterministic direction fixing for null-space vectors
// ---------------------------------------------------------------------------

/// Rotate a complex vector's global phase so its first significant component
/// is real and positive.
inline Vec fix_phase(Vec v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Index k = 0; k < v.size(); ++k) {
    if (std::abs(v(k)) > 1e-12 * scale) {
      v *= std::conj(v(k)) / std::abs(v(k));
      break;
    }
  }
  return v;
}

/// Flip a real vector's sign so its first significant component is positive.
inline RVec fix_sign(RVec v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Index k = 0; k < v.size(); ++k) {
    if (std::abs(v(k)) > 1e-12 * scale) {
      if (v(k) < 0.0)
        v = -v;
      break;
    }
  }
  return v;
}

}  // namespace chanfold
