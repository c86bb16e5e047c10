#pragma once

#include "chanfold/linalg.hpp"

#include <random>

namespace testutil {

using chanfold::Complex;
using chanfold::Index;
using chanfold::Mat;
using chanfold::Vec;

inline Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Mat pauli_y() {
  Mat m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

inline Mat pauli_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline Mat randn(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  return chanfold::randn_complex(rows, cols, gen);
}

inline Mat random_hermitian(Index n, std::uint64_t seed) {
  Mat g = randn(n, n, seed);
  return 0.5 * (g + g.adjoint());
}

inline Mat random_unitary(Index n, std::uint64_t seed) {
  return chanfold::haar_isometry(n, n, seed);
}

inline double frob_dist(const Mat &a, const Mat &b) { return (a - b).norm(); }

}  // namespace testutil
