#pragma once

#include "chanfold/channel.hpp"

#include <algorithm>

namespace chanfold {

// ---------------------------------------------------------------------------
// Extremality of a channel within the convex set of all channels.
//
// A channel with minimal Kraus representation {A_i} is extreme if and only
// if the r^2 products {A_i* A_j} are linearly independent. When r > s this
// is impossible (there are more products than the dimension of s x s
// matrices), so such channels are classified without running the criterion.
// ---------------------------------------------------------------------------

enum class ExtremalityReason {
  criterion_rank,          // decided by the rank of the product family
  rank_exceeds_input_dim,  // r > s, never extreme
  not_minimal,             // criterion requires a minimal representation
};

inline const char *to_string(ExtremalityReason reason) {
  switch (reason) {
    case ExtremalityReason::criterion_rank: return "criterion_rank";
    case ExtremalityReason::rank_exceeds_input_dim:
      return "rank_exceeds_input_dim";
    case ExtremalityReason::not_minimal: return "not_minimal";
  }
  return "unknown";
}

struct MinimalityReport {
  bool is_minimal = false;
  RankReport gram_rank;  // rank of the st x r stack of vec(A_i)
};

struct ExtremalityReport {
  bool is_extreme = false;
  ExtremalityReason reason = ExtremalityReason::criterion_rank;
  RankReport products_rank;  // rank report of the s^2 x r^2 criterion matrix
  double margin = 0.0;       // r^2-th singular value / largest, 0 if absent
};

/// s^2 x r^2 matrix whose column (i,j), ordered lexicographically, is
/// vec(A_i* A_j).
inline Mat criterion_matrix(const KrausChannel &k) {
  const Index r = k.kraus_count();
  Mat m(k.s * k.s, r * r);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < r; ++j)
      m.col(i * r + j) = vec(k.ops[i].adjoint() * k.ops[j]);
  return m;
}

/// Minimality = linear independence of the Kraus operators.
inline MinimalityReport is_minimal(const KrausChannel &k,
                                   double rel_tol = kDefaultRelTol) {
  validate_kraus(k);
  MinimalityReport report;
  report.gram_rank = numerical_rank(kraus_stack(k.ops), rel_tol);
  report.is_minimal = report.gram_rank.rank == k.kraus_count();
  return report;
}

inline ExtremalityReport is_extreme(const KrausChannel &k,
                                    double rel_tol = kDefaultRelTol) {
  validate_kraus(k);
  ExtremalityReport report;
  report.products_rank = numerical_rank(criterion_matrix(k), rel_tol);
  const Index wanted = k.kraus_count() * k.kraus_count();
  const auto &sv = report.products_rank.singular_values;
  if (static_cast<Index>(sv.size()) >= wanted && sv[0] > 0.0)
    report.margin = sv[wanted - 1] / sv[0];

  if (!is_minimal(k, rel_tol).is_minimal) {
    report.reason = ExtremalityReason::not_minimal;
    report.is_extreme = false;
    return report;
  }
  if (k.kraus_count() > k.s) {
    report.reason = ExtremalityReason::rank_exceeds_input_dim;
    report.is_extreme = false;
    return report;
  }
  report.reason = ExtremalityReason::criterion_rank;
  report.is_extreme = report.products_rank.rank == wanted;
  return report;
}

// ---------------------------------------------------------------------------
// Genericity sweep
// ---------------------------------------------------------------------------

struct MarginSweep {
  int n_samples = 0;
  int n_extreme = 0;
  double fraction_extreme = 0.0;
  double min_margin = 0.0;
  double median_margin = 0.0;
  double max_margin = 0.0;
};

/// Samples random rank-r channels and summarizes how decisively the
/// extremality criterion holds. Extremality is an open condition, so for
/// r <= s the expected fraction is 1.
inline MarginSweep extremality_margin_sweep(Index s, Index t, Index r,
                                            int n_samples, std::uint64_t seed,
                                            double rel_tol = kDefaultRelTol) {
  if (r > s)
    throw input_error("extremality_margin_sweep: requires r <= s");
  if (n_samples <= 0)
    throw input_error("extremality_margin_sweep: n_samples must be positive");
  MarginSweep sweep;
  sweep.n_samples = n_samples;
  std::vector<double> margins;
  margins.reserve(n_samples);
  for (int k = 0; k < n_samples; ++k) {
    KrausChannel chan =
        random_channel(s, t, r, derive_seed(seed, static_cast<std::uint64_t>(k)),
                       rel_tol);
    ExtremalityReport report = is_extreme(chan, rel_tol);
    if (report.is_extreme)
      ++sweep.n_extreme;
    margins.push_back(report.margin);
  }
  std::sort(margins.begin(), margins.end());
  sweep.fraction_extreme = double(sweep.n_extreme) / double(n_samples);
  sweep.min_margin = margins.front();
  sweep.max_margin = margins.back();
  sweep.median_margin = margins[margins.size() / 2];
  return sweep;
}

}  // namespace chanfold
