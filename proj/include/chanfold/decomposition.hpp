#pragma once

#include "chanfold/extremality.hpp"

#include <optional>
#include <utility>

namespace chanfold {

// ---------------------------------------------------------------------------
// Convex decomposition of a channel into extreme channels.
//
// A non-extreme channel admits a Hermitian witness lambda with
// sum_ij lambda_ij A_j* A_i = 0. The induced perturbation
// D = (1/s) sum_ij lambda_ij w_i w_j* of the Choi state is traceless,
// Hermitian and has vanishing output marginal, so C +/- tD stays inside the
// channel set until an eigenvalue crosses zero. Walking to both boundary
// points splits C into two channels of strictly smaller rank; recursion
// terminates in extreme leaves, and a Caratheodory pass prunes the terms
// back to the ambient bound 2 s^2 t^2 + 1.
// ---------------------------------------------------------------------------

struct SplitCertificate {
  Mat lambda;  // Hermitian witness, unit Frobenius norm
  double t_plus = 0.0;
  double t_minus = 0.0;
  std::pair<Index, Index> child_ranks{0, 0};
};

/// A leaf whose criterion margin falls in the ambiguous band
/// (rel_tol, 10 rel_tol]: neither a trusted extreme point nor a trusted
/// split. Carries the leaf and both rank margins so the caller can audit
/// the borderline instead of receiving a silent classification.
class ambiguous_leaf_error : public numeric_error {
public:
  ambiguous_leaf_error(const std::string &message, ChoiState leaf,
                       double criterion_margin, double gram_margin)
      : numeric_error(message), leaf_(std::move(leaf)),
        criterion_margin_(criterion_margin), gram_margin_(gram_margin) {}

  const ChoiState &leaf() const { return leaf_; }
  double criterion_margin() const { return criterion_margin_; }
  double gram_margin() const { return gram_margin_; }

private:
  ChoiState leaf_;
  double criterion_margin_;
  double gram_margin_;
};

struct DecompositionTerm {
  double weight = 0.0;
  ChoiState channel;
  double extremality_margin = 0.0;
};

struct DecompositionResult {
  std::vector<DecompositionTerm> terms;
  double residual = 0.0;
  Index split_tree_depth = 0;
  std::vector<SplitCertificate> certificates;
};

/// || sum_ij lambda_ij A_j* A_i ||_F, the defect of a dependence witness.
inline double relation_residual(const std::vector<Mat> &ops,
                                const Mat &lambda) {
  const Index r = static_cast<Index>(ops.size());
  Mat acc = Mat::Zero(ops[0].cols(), ops[0].cols());
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < r; ++j)
      acc += lambda(i, j) * ops[j].adjoint() * ops[i];
  return acc.norm();
}

/// Hermitian witness of linear dependence among the products {A_i* A_j} of
/// a minimal Kraus family, or nothing when the family is extreme. The null
/// vector is the right singular vector of the smallest singular value,
/// phase-fixed on its first significant component; the solution set is
/// closed under conjugate transposition, so at least one of the two
/// Hermitian projections is nonzero and the larger one is returned.
inline std::optional<Mat> find_dependence(const KrausChannel &k,
                                          double rel_tol = kDefaultRelTol) {
  if (!is_minimal(k, rel_tol).is_minimal)
    throw input_error("find_dependence: input must be minimal");
  const Index r = k.kraus_count();
  const Index r2 = r * r;
  Eigen::JacobiSVD<Mat> svd(criterion_matrix(k), Eigen::ComputeFullV);
  const RVec &sv = svd.singularValues();
  if (sv.size() >= r2 && sv(r2 - 1) > rel_tol * sv(0))
    return std::nullopt;
  Vec mu = fix_phase(svd.matrixV().col(r2 - 1));
  Mat m(r, r);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < r; ++j)
      m(j, i) = mu(i * r + j);
  Mat herm = 0.5 * (m + m.adjoint());
  Mat skew = (m - m.adjoint()) / Complex(0, 2);
  Mat lambda = herm.norm() >= skew.norm() ? herm : skew;
  lambda /= lambda.norm();
  return lambda;
}

struct SplitOutcome {
  double weight = 0.0;  // weight of the left child
  ChoiState left;
  ChoiState right;
  SplitCertificate certificate;
};

/// Walks from C to both boundary points along the witness direction.
/// The step sizes come from the generalized eigenvalues of D restricted to
/// the support of C, so each child loses at least one unit of rank and the
/// mixture p*left + (1-p)*right reconstructs C.
inline SplitOutcome split_once(const ChoiState &c, const Mat &lambda,
                               double rel_tol = kDefaultRelTol,
                               double validation_tol = 1e-9) {
  validate_choi(c, validation_tol, validation_tol);
  const Index d = c.s * c.t;
  HermEig eig = herm_eig(double(c.s) * c.matrix, 1e-8);
  const double lam_max = eig.eigenvalues(d - 1);
  std::vector<Index> kept;
  for (Index idx = d - 1; idx >= 0; --idx)
    if (eig.eigenvalues(idx) > rel_tol * lam_max)
      kept.push_back(idx);
  const Index rank = static_cast<Index>(kept.size());
  if (lambda.rows() != rank || lambda.cols() != rank)
    throw input_error("split_once: witness size does not match the rank");
  if ((lambda - lambda.adjoint()).norm() > 1e-10 * lambda.norm())
    throw input_error("split_once: witness must be Hermitian");

  Mat frame(d, rank);  // columns w_i = sqrt(eig_i) v_i of s*C
  for (Index i = 0; i < rank; ++i)
    frame.col(i) =
        std::sqrt(eig.eigenvalues(kept[i])) * eig.eigenvectors.col(kept[i]);

  Mat dir_raw = Mat::Zero(d, d);
  for (Index i = 0; i < rank; ++i)
    for (Index j = 0; j < rank; ++j)
      dir_raw += lambda(i, j) * frame.col(i) * frame.col(j).adjoint();
  dir_raw /= double(c.s);
  Mat dir = 0.5 * (dir_raw + dir_raw.adjoint());

  const double dir_scale = std::max(1.0, dir.norm());
  if (std::abs(dir.trace()) > 1e-10 * dir_scale ||
      partial_trace(dir, c.s, c.t, TracedFactor::second).norm() >
          1e-10 * dir_scale)
    throw input_error("split_once: witness is not a valid dependence "
                      "(perturbation leaves the channel affine space)");

  // Generalized eigenvalues of dir on the support of C.
  Mat q(d, rank);
  RVec support_eigs(rank);
  for (Index i = 0; i < rank; ++i) {
    q.col(i) = eig.eigenvectors.col(kept[i]);
    support_eigs(i) = eig.eigenvalues(kept[i]) / double(c.s);
  }
  Mat compressed = q.adjoint() * dir * q;
  RVec inv_sqrt = support_eigs.cwiseSqrt().cwiseInverse();
  Mat scaled = inv_sqrt.asDiagonal() * compressed * inv_sqrt.asDiagonal();
  HermEig pencil = herm_eig(scaled, 1e-8);
  const double mu_min = pencil.eigenvalues(0);
  const double mu_max = pencil.eigenvalues(rank - 1);
  if (!(mu_min < 0.0) || !(mu_max > 0.0))
    throw numeric_error("split_once: support restriction failed to produce "
                        "a two-sided direction");

  SplitOutcome out;
  out.certificate.lambda = lambda;
  out.certificate.t_plus = -1.0 / mu_min;
  out.certificate.t_minus = 1.0 / mu_max;
  out.weight = out.certificate.t_minus /
               (out.certificate.t_plus + out.certificate.t_minus);
  Mat left = c.matrix + out.certificate.t_plus * dir;
  Mat right = c.matrix - out.certificate.t_minus * dir;
  out.left = ChoiState{c.s, c.t, 0.5 * (left + left.adjoint())};
  out.right = ChoiState{c.s, c.t, 0.5 * (right + right.adjoint())};
  out.certificate.child_ranks = {
      numerical_rank(out.left.matrix, rel_tol).rank,
      numerical_rank(out.right.matrix, rel_tol).rank};
  if (out.certificate.child_ranks.first >= rank ||
      out.certificate.child_ranks.second >= rank)
    throw numeric_error("split_once: child rank failed to decrease");
  return out;
}

/// Prunes a convex combination down to at most ambient_real_dim + 1 terms
/// by repeatedly cancelling an affine dependence among the states. Weights
/// step along the dependence until one term hits zero; the mixture itself
/// is unchanged. ambient_real_dim <= 0 selects the ambient bound 2 s^2 t^2.
inline std::vector<DecompositionTerm> caratheodory_reduce(
    std::vector<DecompositionTerm> terms, Index ambient_real_dim = 0) {
  if (terms.empty())
    throw input_error("caratheodory_reduce: empty term list");
  const Index s = terms[0].channel.s;
  const Index t = terms[0].channel.t;
  double total = 0.0;
  for (const DecompositionTerm &term : terms) {
    if (term.channel.s != s || term.channel.t != t)
      throw input_error("caratheodory_reduce: mixed channel dimensions");
    if (term.weight <= 0.0)
      throw input_error("caratheodory_reduce: weights must be positive");
    total += term.weight;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw input_error("caratheodory_reduce: weights must sum to 1");
  if (ambient_real_dim <= 0)
    ambient_real_dim = 2 * s * s * t * t;

  while (static_cast<Index>(terms.size()) > ambient_real_dim + 1) {
    const Index k = static_cast<Index>(terms.size());
    RMat system(2 * s * t * s * t + 1, k);
    for (Index i = 0; i < k; ++i) {
      system.col(i).head(2 * s * t * s * t) = realvec(terms[i].channel.matrix);
      system(2 * s * t * s * t, i) = 1.0;
    }
    Eigen::JacobiSVD<RMat> svd(system, Eigen::ComputeFullV);
    RVec coeff = fix_sign(svd.matrixV().col(k - 1));
    if ((system * coeff).norm() > 1e-8)
      throw numeric_error("caratheodory_reduce: no affine dependence found; "
                          "check the rank tolerance configuration");
    const double cmax = coeff.cwiseAbs().maxCoeff();
    double tau = std::numeric_limits<double>::infinity();
    Index drop = -1;
    for (Index i = 0; i < k; ++i) {
      if (coeff(i) > 1e-14 * cmax && terms[i].weight / coeff(i) < tau) {
        tau = terms[i].weight / coeff(i);
        drop = i;
      }
    }
    if (drop < 0)
      throw numeric_error("caratheodory_reduce: dependence has no positive "
                          "component");
    std::vector<DecompositionTerm> next;
    next.reserve(terms.size() - 1);
    for (Index i = 0; i < k; ++i) {
      if (i == drop)
        continue;
      DecompositionTerm term = std::move(terms[i]);
      term.weight -= tau * coeff(i);
      if (term.weight > 1e-14)
        next.push_back(std::move(term));
    }
    terms = std::move(next);
  }
  return terms;
}

/// Full decomposition: recursive witness splitting until every leaf is
/// extreme, then Caratheodory reduction to the ambient bound. A leaf whose
/// criterion margin lands in the ambiguous band (rel_tol, 10 rel_tol] is
/// neither trusted extreme nor split and raises an error instead of being
/// silently classified.
inline DecompositionResult decompose_extreme(const ChoiState &c,
                                             double rel_tol = kDefaultRelTol,
                                             Index max_depth = -1) {
  validate_choi(c, 1e-9, 1e-9);
  DecompositionResult result;
  const Index root_rank = numerical_rank(c.matrix, rel_tol).rank;
  const Index depth_limit = max_depth >= 0 ? max_depth : root_rank - 1;

  struct Frame {
    ChoiState state;
    double weight;
    Index depth;
  };
  std::vector<Frame> pending;
  pending.push_back({c, 1.0, 0});
  while (!pending.empty()) {
    Frame frame = std::move(pending.back());
    pending.pop_back();
    KrausChannel k = choi_to_kraus(frame.state, rel_tol, 1e-9);
    ExtremalityReport report = is_extreme(k, rel_tol);
    if (report.is_extreme) {
      if (report.margin <= 10 * rel_tol) {
        const double gram_margin = is_minimal(k, rel_tol).gram_rank.margin;
        throw ambiguous_leaf_error(
            "decompose_extreme: leaf in the ambiguous band (criterion margin " +
                std::to_string(report.margin) + ", gram margin " +
                std::to_string(gram_margin) + "); refusing to classify",
            std::move(frame.state), report.margin, gram_margin);
      }
      result.terms.push_back(
          {frame.weight, std::move(frame.state), report.margin});
      result.split_tree_depth = std::max(result.split_tree_depth, frame.depth);
      continue;
    }
    if (frame.depth >= depth_limit)
      throw numeric_error("decompose_extreme: split depth limit reached");
    std::optional<Mat> witness = find_dependence(k, rel_tol);
    if (!witness)
      throw numeric_error("decompose_extreme: non-extreme leaf without a "
                          "dependence witness");
    SplitOutcome split = split_once(frame.state, *witness, rel_tol);
    result.certificates.push_back(split.certificate);
    // Right pushed first so the left branch is processed first.
    pending.push_back({std::move(split.right),
                       frame.weight * (1.0 - split.weight), frame.depth + 1});
    pending.push_back(
        {std::move(split.left), frame.weight * split.weight, frame.depth + 1});
  }

  result.terms = caratheodory_reduce(std::move(result.terms));
  Mat mix = Mat::Zero(c.s * c.t, c.s * c.t);
  for (const DecompositionTerm &term : result.terms)
    mix += term.weight * term.channel.matrix;
  result.residual = (mix - c.matrix).norm();
  return result;
}

}  // namespace chanfold
