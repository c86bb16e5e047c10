#include "chanfold/geometry.hpp"

#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace chanfold;
using testutil::frob_dist;
using testutil::random_hermitian;

namespace {

// The Choi map extended to arbitrary matrices, used as the finite-difference
// oracle for the analytic pushforward (isometry validation intentionally
// skipped: the map is smooth on the whole ambient space).
Mat choi_map_ambient(const Mat &w, Index s, Index env, Index out) {
  Vec g = stinespring_vector(w, s);
  Mat full = g * g.adjoint();
  return trace_middle(full, s, env, out) / double(s);
}

Isometry random_isometry(Index s, Index env, Index out, std::uint64_t seed) {
  return Isometry{s, env, out, haar_isometry(s, env * out, seed)};
}

}  // namespace

TEST_CASE("manifold_dim formula values", "[geometry]") {
  CHECK(manifold_dim(2, 2, 2) == 8);
  CHECK(manifold_dim(2, 2, 4) == 12);
  for (Index t : {1, 2, 3, 5})
    CHECK(manifold_dim(1, t, 1) == 2 * t - 2);

  CHECK_THROWS_AS(manifold_dim(4, 1, 2), input_error);  // s > r*t
  CHECK_THROWS_AS(manifold_dim(2, 2, 5), input_error);  // r > s*t
}

TEST_CASE("stiefel_tangent_basis counts and residuals", "[geometry]") {
  SECTION("scalar case: the imaginary direction") {
    Isometry v = random_isometry(1, 1, 1, 3);
    std::vector<Mat> basis = stiefel_tangent_basis(v);
    REQUIRE(basis.size() == 1);
    // Kernel of 2 Re(conj(v) x) = span{iv}.
    Complex overlap = (basis[0].adjoint() * (Complex(0, 1) * v.matrix))(0, 0);
    CHECK(std::abs(std::abs(overlap) - 1.0) < 1e-12);
  }

  SECTION("unitary case: tangent of U(2)") {
    Isometry v = random_isometry(2, 1, 2, 4);
    CHECK(stiefel_tangent_basis(v).size() == 4);
  }

  SECTION("constraint residual and orthonormality at random points") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Index s = 2, r = 2, t = 2;
      Isometry v = random_isometry(s, r, t, seed + 10);
      std::vector<Mat> basis = stiefel_tangent_basis(v);
      REQUIRE(static_cast<Index>(basis.size()) == 2 * s * (r * t) - s * s);
      for (const Mat &x : basis) {
        CHECK((v.matrix.adjoint() * x + x.adjoint() * v.matrix).norm() <=
              1e-10);
        CHECK(std::abs(x.norm() - 1.0) < 1e-12);
      }
      // Pairwise real-orthogonal: Re tr(X_a* X_b) = delta_ab.
      for (std::size_t a = 0; a < basis.size(); ++a)
        for (std::size_t b = a + 1; b < basis.size(); ++b)
          CHECK(std::abs(realvec(basis[a]).dot(realvec(basis[b]))) < 1e-12);
    }
  }
}

TEST_CASE("pushforward_T kills gauge directions", "[geometry]") {
  Isometry v = random_isometry(2, 2, 2, 21);

  Mat global_phase = Complex(0, 1) * v.matrix;
  CHECK(pushforward_T(v, global_phase).norm() < 1e-12);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Mat h = random_hermitian(2, seed + 30);
    Mat x = kron(Complex(0, 1) * h, Mat::Identity(2, 2)) * v.matrix;
    CHECK(pushforward_T(v, x).norm() < 1e-12);
  }
}

TEST_CASE("pushforward_T matches central finite differences", "[geometry]") {
  const double eps = 1e-5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Index s = 2, r = 2, t = 2;
    Isometry v = random_isometry(s, r, t, seed + 40);
    Mat x = testutil::randn(r * t, s, seed + 140);
    x /= x.norm();
    Mat fd = (choi_map_ambient(v.matrix + eps * x, s, r, t) -
              choi_map_ambient(v.matrix - eps * x, s, r, t)) /
             (2 * eps);
    CHECK(frob_dist(fd, pushforward_T(v, x)) <= 1e-8);
  }
}

TEST_CASE("pushforward_T output is Hermitian with zero output marginal",
          "[geometry]") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Index s = 2, r = 2, t = 3;
    Isometry v = random_isometry(s, r, t, seed + 60);
    for (const Mat &x : stiefel_tangent_basis(v)) {
      Mat push = pushforward_T(v, x);
      CHECK((push - push.adjoint()).norm() < 1e-12);
      CHECK(partial_trace(push, s, t, TracedFactor::second).norm() <= 1e-10);
    }
  }
  Isometry v = random_isometry(2, 2, 2, 61);
  CHECK_THROWS_AS(pushforward_T(v, Mat::Zero(3, 3)), input_error);
}

TEST_CASE("numeric dimension equals the formula", "[geometry]") {
  CHECK(numeric_choi_manifold_dim(2, 2, 2, 0).numeric_dim == 8);
  CHECK(numeric_choi_manifold_dim(2, 2, 1, 1).numeric_dim == 3);
  CHECK(numeric_choi_manifold_dim(2, 3, 2, 2).numeric_dim == 16);

  DimensionReport report = numeric_choi_manifold_dim(2, 2, 2, 0);
  CHECK(report.numeric_dim == report.formula_dim);
  CHECK(report.margin > 1e-6);
}

TEST_CASE("numeric dimension across a small grid", "[geometry]") {
  for (Index s : {1, 2})
    for (Index t : {1, 2})
      for (Index r = 1; r <= std::min<Index>(s * t, 4); ++r) {
        if (s > r * t)
          continue;
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
          DimensionReport report = numeric_choi_manifold_dim(s, t, r, seed);
          INFO("s=" << s << " t=" << t << " r=" << r << " seed=" << seed);
          CHECK(report.numeric_dim == report.formula_dim);
        }
      }
}

TEST_CASE("gauge directions are exactly the pushforward kernel", "[geometry]") {
  // Kernel dimension inside the tangent space matches dim U(r) = r^2 at
  // generic points, for every shape.
  for (auto [s, t, r] : {std::tuple<Index, Index, Index>{2, 2, 2},
                         {2, 2, 3},
                         {2, 3, 2},
                         {3, 2, 2},
                         {1, 2, 2}}) {
    DimensionReport report = numeric_choi_manifold_dim(s, t, r, 77);
    const Index tangent_dim = 2 * s * (r * t) - s * s;
    INFO("s=" << s << " t=" << t << " r=" << r);
    CHECK(tangent_dim - report.numeric_dim == r * r);
  }
}

TEST_CASE("psd_tangent_dim values", "[geometry]") {
  CHECK(psd_tangent_dim(2, 2, 0) == 4);
  CHECK(psd_tangent_dim(2, 1, 0) == 3);
  CHECK(psd_tangent_dim(3, 2, 0) == 8);
  CHECK_THROWS_AS(psd_tangent_dim(2, 3, 0), input_error);
  CHECK_THROWS_AS(psd_tangent_dim(2, 0, 0), input_error);
}

TEST_CASE("psd_tangent_dim does not depend on the sampled point",
          "[geometry]") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
    CHECK(psd_tangent_dim(3, 2, seed) == 8);
}
