#include "chanfold/extremality.hpp"

#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace chanfold;
using testutil::frob_dist;
using testutil::random_unitary;

namespace {

KrausChannel mix_identity_and_flip() {
  const double inv = 1.0 / std::sqrt(2.0);
  return KrausChannel{2, 2,
                      {inv * Mat::Identity(2, 2), inv * testutil::pauli_x()}};
}

KrausChannel depolarizing_channel() {
  return KrausChannel{2,
                      2,
                      {0.5 * Mat::Identity(2, 2), 0.5 * testutil::pauli_x(),
                       0.5 * testutil::pauli_y(), 0.5 * testutil::pauli_z()}};
}

Vec haar_state(Index t, std::uint64_t seed) {
  return haar_isometry(1, t, seed).col(0);
}

KrausChannel conjugate_io(const KrausChannel &k, const Mat &w_out,
                          const Mat &w_in) {
  KrausChannel out{k.s, k.t, {}};
  for (const Mat &op : k.ops)
    out.ops.push_back(w_out * op * w_in);
  return out;
}

KrausChannel apply_mixing(const KrausChannel &k, const Mat &u) {
  KrausChannel out{k.s, k.t, {}};
  for (Index j = 0; j < u.rows(); ++j) {
    Mat op = Mat::Zero(k.t, k.s);
    for (Index i = 0; i < u.cols(); ++i)
      op += u(j, i) * k.ops[i];
    out.ops.push_back(std::move(op));
  }
  return out;
}

}  // namespace

TEST_CASE("is_minimal detects dependent Kraus families", "[extremality]") {
  Vec psi(2);
  psi << 1, 0;
  CHECK(is_minimal(extreme_example(2, 2, psi)).is_minimal);

  // Duplicated operators: trace preserving but Gram rank 1.
  KrausChannel dup{2, 2,
                   {Mat::Identity(2, 2) / std::sqrt(2.0),
                    Mat::Identity(2, 2) / std::sqrt(2.0)}};
  MinimalityReport report = is_minimal(dup);
  CHECK_FALSE(report.is_minimal);
  CHECK(report.gram_rank.rank == 1);

  for (std::uint64_t seed = 0; seed < 100; ++seed)
    CHECK(is_minimal(random_channel(2, 2, 3, seed)).is_minimal);
}

TEST_CASE("is_extreme ground truths", "[extremality]") {
  SECTION("unitary channels are extreme") {
    KrausChannel u{2, 2, {random_unitary(2, 3)}};
    ExtremalityReport report = is_extreme(u);
    CHECK(report.is_extreme);
    CHECK(report.reason == ExtremalityReason::criterion_rank);
    CHECK(report.products_rank.rank == 1);
  }

  SECTION("r > s can never be extreme") {
    ExtremalityReport report = is_extreme(depolarizing_channel());
    CHECK_FALSE(report.is_extreme);
    CHECK(report.reason == ExtremalityReason::rank_exceeds_input_dim);
  }

  SECTION("discard-and-prepare products are the matrix units") {
    Vec psi(2);
    psi << 1, 0;
    ExtremalityReport report = is_extreme(extreme_example(2, 2, psi));
    CHECK(report.is_extreme);
    CHECK(report.products_rank.rank == 4);
  }

  SECTION("a proper mixture fails the criterion") {
    // Products {I/2, X/2, X/2, I/2}: only two distinct directions.
    ExtremalityReport report = is_extreme(mix_identity_and_flip());
    CHECK_FALSE(report.is_extreme);
    CHECK(report.reason == ExtremalityReason::criterion_rank);
    CHECK(report.products_rank.rank == 2);
  }

  SECTION("non-minimal input is reported, not reduced") {
    KrausChannel dup{2, 2,
                     {Mat::Identity(2, 2) / std::sqrt(2.0),
                      Mat::Identity(2, 2) / std::sqrt(2.0)}};
    ExtremalityReport report = is_extreme(dup);
    CHECK_FALSE(report.is_extreme);
    CHECK(report.reason == ExtremalityReason::not_minimal);
  }
}

TEST_CASE("named qubit channels classify correctly", "[extremality]") {
  // Amplitude damping (0 < g < 1) is extreme with Kraus rank 2; phase
  // damping is a mixture of unitaries and is not.
  const double g = 0.3;
  Mat damp0(2, 2), damp1(2, 2);
  damp0 << 1, 0, 0, std::sqrt(1 - g);
  damp1 << 0, std::sqrt(g), 0, 0;
  ExtremalityReport damping = is_extreme(KrausChannel{2, 2, {damp0, damp1}});
  CHECK(damping.is_extreme);
  CHECK(damping.products_rank.rank == 4);

  const double p = 0.2;
  KrausChannel dephase{2, 2,
                       {std::sqrt(1 - p) * Mat::Identity(2, 2),
                        std::sqrt(p) * testutil::pauli_z()}};
  ExtremalityReport dephase_report = is_extreme(dephase);
  CHECK_FALSE(dephase_report.is_extreme);
  CHECK(dephase_report.products_rank.rank == 2);
}

TEST_CASE("extremality is invariant under unitary mixing", "[extremality]") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    KrausChannel k = random_channel(2, 2, 2, seed + 50);
    Mat u = random_unitary(2, seed + 150);
    ExtremalityReport base = is_extreme(k);
    ExtremalityReport mixed = is_extreme(apply_mixing(k, u));
    CHECK(base.is_extreme == mixed.is_extreme);
    CHECK(base.products_rank.rank == mixed.products_rank.rank);
  }
}

TEST_CASE("extremality is covariant under input/output unitaries",
          "[extremality]") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    KrausChannel k = random_channel(2, 3, 2, seed + 70);
    Mat w_out = random_unitary(3, seed + 170);
    Mat w_in = random_unitary(2, seed + 270);
    CHECK(is_extreme(k).is_extreme ==
          is_extreme(conjugate_io(k, w_out, w_in)).is_extreme);
  }
}

TEST_CASE("r > s forces non-extremality", "[extremality]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    KrausChannel k = random_channel(2, 3, 3, seed + 90);
    ExtremalityReport report = is_extreme(k);
    CHECK_FALSE(report.is_extreme);
    CHECK(report.reason == ExtremalityReason::rank_exceeds_input_dim);
  }
}

TEST_CASE("extreme_example is extreme for Haar states", "[extremality]") {
  for (Index s : {2, 3, 4}) {
    for (Index t = s; t <= 4; ++t) {
      for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Vec psi = haar_state(t, 31 * seed + 5 * s + t);
        CHECK(is_extreme(extreme_example(s, t, psi)).is_extreme);
      }
    }
  }
}

TEST_CASE("adjoints of mixtures fail the unital criterion", "[extremality]") {
  // A proper mixture built in Choi space maps to a non-extreme unital map:
  // the adjoint criterion matrix with columns vec(Adj_i Adj_j*) is rank
  // deficient exactly when the channel criterion is.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ChoiState c1 = kraus_to_choi(random_channel(2, 2, 2, seed + 600));
    ChoiState c2 = kraus_to_choi(random_channel(2, 2, 2, seed + 700));
    ChoiState mix{2, 2, 0.5 * c1.matrix + 0.5 * c2.matrix};
    KrausChannel k = choi_to_kraus(mix);
    ExtremalityReport report = is_extreme(k);
    CHECK_FALSE(report.is_extreme);

    AdjointKraus adj = adjoint_channel(k);
    const Index r = k.kraus_count();
    Mat unital_criterion(k.s * k.s, r * r);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < r; ++j)
        unital_criterion.col(i * r + j) =
            vec(adj.ops[i] * adj.ops[j].adjoint());
    CHECK(numerical_rank(unital_criterion).rank < r * r);
  }
}

TEST_CASE("margin sweep sees only extreme channels for r <= s",
          "[extremality][slow]") {
  MarginSweep qubit = extremality_margin_sweep(2, 2, 2, 200, 0);
  CHECK(qubit.fraction_extreme == 1.0);
  CHECK(qubit.min_margin > 0.0);
  CHECK(qubit.median_margin >= qubit.min_margin);
  CHECK(qubit.max_margin >= qubit.median_margin);

  MarginSweep qutrit = extremality_margin_sweep(3, 3, 3, 100, 1);
  CHECK(qutrit.fraction_extreme == 1.0);

  MarginSweep unitary = extremality_margin_sweep(2, 2, 1, 50, 2);
  CHECK(unitary.fraction_extreme == 1.0);

  CHECK_THROWS_AS(extremality_margin_sweep(2, 2, 3, 10, 0), input_error);
}
