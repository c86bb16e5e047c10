#pragma once

#include "chanfold/geometry.hpp"
#include "chanfold/serialize.hpp"

#include <set>

namespace chanfold {

// ---------------------------------------------------------------------------
// Parametrized circuit topologies.
//
// A topology fixes dimensions (d_A, d_B, d_C) with d_B d_C >= d_A and a gate
// sequence on the (C, B) space, the environment C being the first tensor
// factor. Fixed gates are unitaries; rotation gates contribute
// exp(-i theta_k G) for a Hermitian generator G and shared parameter index
// k. Evaluating at a parameter vector yields the isometry
// (product of gates, last applied leftmost) * V0 with V0 = [I_dA; 0].
// ---------------------------------------------------------------------------

struct Gate {
  enum class Kind { fixed, rotation };
  Kind kind = Kind::fixed;
  Mat matrix;  // unitary for fixed gates, Hermitian generator for rotations
  std::vector<Index> targets;  // ordered factor indices
  Index param_index = -1;      // rotations only
};

struct CircuitTopology {
  Index d_A = 0;
  Index d_B = 0;
  Index d_C = 0;
  Index p = 0;  // parameter count
  std::vector<Index> factors;
  std::size_t env_factor_count = 0;  // leading factors composing C
  std::vector<Gate> gates;
  std::string init = "pad";
};

struct AuditReport {
  bool passes_param_bound = false;
  Index required_params = 0;  // 2 d_A^2 (d_B - 1)
  bool passes_env_bound = false;
  Index required_env = 0;  // d_A
  Index estimated_generated_dim = 0;
  Index target_dim = 0;
  int sample_count = 0;
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

inline CircuitTopology parse_topology(const json &doc) {
  CircuitTopology z;
  z.d_A = int_field(doc, "d_A", "");
  z.d_B = int_field(doc, "d_B", "");
  z.d_C = int_field(doc, "d_C", "");
  if (z.d_A <= 0 || z.d_B <= 0 || z.d_C <= 0)
    throw input_error("dimensions must be positive", "/d_A");
  if (z.d_B * z.d_C < z.d_A)
    throw input_error("requires d_B * d_C >= d_A", "/d_C");

  if (doc.contains("init")) {
    if (!doc.at("init").is_string() || doc.at("init") != "pad")
      throw input_error("only the 'pad' embedding is supported", "/init");
  }

  if (doc.contains("factors")) {
    const json &factors = doc.at("factors");
    if (!factors.is_array() || factors.empty())
      throw input_error("factors must be a non-empty array", "/factors");
    for (std::size_t i = 0; i < factors.size(); ++i) {
      if (!factors.at(i).is_number_integer() ||
          factors.at(i).get<Index>() <= 0)
        throw input_error("factors must be positive integers",
                          "/factors/" + std::to_string(i));
      z.factors.push_back(factors.at(i).get<Index>());
    }
  } else {
    z.factors = {z.d_C, z.d_B};
  }
  Index product = 1;
  for (Index f : z.factors)
    product *= f;
  if (product != z.d_C * z.d_B)
    throw input_error("factors must multiply to d_C * d_B", "/factors");
  // The smallest prefix multiplying to d_C splits the factors into (C, B).
  Index prefix = 1;
  std::size_t cut = 0;
  while (prefix != z.d_C && cut < z.factors.size())
    prefix *= z.factors[cut++];
  if (prefix != z.d_C)
    throw input_error("no prefix of factors multiplies to d_C", "/factors");
  z.env_factor_count = cut;

  std::set<Index> referenced;
  const json &gates = require_field(doc, "gates", "");
  if (!gates.is_array())
    throw input_error("gates must be an array", "/gates");
  for (std::size_t g = 0; g < gates.size(); ++g) {
    const std::string path = "/gates/" + std::to_string(g);
    const json &gate_doc = gates.at(g);
    Gate gate;
    const json &kind = require_field(gate_doc, "kind", path);
    const json &targets = require_field(gate_doc, "targets", path);
    if (!targets.is_array() || targets.empty())
      throw input_error("targets must be a non-empty array",
                        path + "/targets");
    Index gate_dim = 1;
    std::set<Index> seen;
    for (std::size_t m = 0; m < targets.size(); ++m) {
      if (!targets.at(m).is_number_integer())
        throw input_error("targets must be factor indices",
                          path + "/targets/" + std::to_string(m));
      Index target = targets.at(m).get<Index>();
      if (target < 0 || target >= static_cast<Index>(z.factors.size()))
        throw input_error("target out of range",
                          path + "/targets/" + std::to_string(m));
      if (!seen.insert(target).second)
        throw input_error("targets must be distinct",
                          path + "/targets/" + std::to_string(m));
      gate.targets.push_back(target);
      gate_dim *= z.factors[target];
    }
    if (kind == "fixed") {
      gate.kind = Gate::Kind::fixed;
      gate.matrix =
          matrix_from_json(require_field(gate_doc, "matrix", path),
                           path + "/matrix");
      if (gate.matrix.rows() != gate_dim || gate.matrix.cols() != gate_dim)
        throw input_error("matrix size must match the target dimensions",
                          path + "/matrix");
      if ((gate.matrix.adjoint() * gate.matrix -
           Mat::Identity(gate_dim, gate_dim)).norm() > 1e-10)
        throw input_error("fixed gate must be unitary", path + "/matrix");
    } else if (kind == "rotation") {
      gate.kind = Gate::Kind::rotation;
      gate.matrix =
          matrix_from_json(require_field(gate_doc, "generator", path),
                           path + "/generator");
      if (gate.matrix.rows() != gate_dim || gate.matrix.cols() != gate_dim)
        throw input_error("generator size must match the target dimensions",
                          path + "/generator");
      if ((gate.matrix - gate.matrix.adjoint()).norm() >
          1e-10 * std::max(1.0, gate.matrix.norm()))
        throw input_error("generator must be Hermitian", path + "/generator");
      gate.param_index = int_field(gate_doc, "param", path);
      if (gate.param_index < 0)
        throw input_error("param must be non-negative", path + "/param");
      referenced.insert(gate.param_index);
    } else {
      throw input_error("kind must be 'fixed' or 'rotation'", path + "/kind");
    }
    z.gates.push_back(std::move(gate));
  }

  z.p = referenced.empty() ? 0 : *referenced.rbegin() + 1;
  for (Index k = 0; k < z.p; ++k)
    if (!referenced.count(k))
      throw input_error("unreferenced parameter " + std::to_string(k),
                        "/gates");
  return z;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace detail {

/// Lift a gate acting on the ordered target factors to the full space.
inline Mat embed_on_targets(const Mat &gate, const std::vector<Index> &targets,
                            const std::vector<Index> &factors) {
  Index full_dim = 1;
  for (Index f : factors)
    full_dim *= f;
  std::vector<Index> strides(factors.size());
  Index stride = 1;
  for (std::size_t k = factors.size(); k-- > 0;) {
    strides[k] = stride;
    stride *= factors[k];
  }
  std::vector<Index> gate_strides(targets.size());
  Index gate_stride = 1;
  for (std::size_t m = targets.size(); m-- > 0;) {
    gate_strides[m] = gate_stride;
    gate_stride *= factors[targets[m]];
  }
  const Index gate_dim = gate.rows();
  Mat full = Mat::Zero(full_dim, full_dim);
  for (Index row = 0; row < full_dim; ++row) {
    Index gate_row = 0;
    Index rest = row;
    for (std::size_t m = 0; m < targets.size(); ++m) {
      Index digit = (row / strides[targets[m]]) % factors[targets[m]];
      gate_row += digit * gate_strides[m];
      rest -= digit * strides[targets[m]];
    }
    for (Index gate_col = 0; gate_col < gate_dim; ++gate_col) {
      Index col = rest;
      for (std::size_t m = 0; m < targets.size(); ++m) {
        Index digit = (gate_col / gate_strides[m]) % factors[targets[m]];
        col += digit * strides[targets[m]];
      }
      full(row, col) = gate(gate_row, gate_col);
    }
  }
  return full;
}

inline Mat rotation_unitary(const Mat &generator, double angle) {
  HermEig eig = herm_eig(generator);
  Vec phases(eig.eigenvalues.size());
  for (Index k = 0; k < eig.eigenvalues.size(); ++k)
    phases(k) = std::exp(Complex(0, -angle * eig.eigenvalues(k)));
  return eig.eigenvectors * phases.asDiagonal() * eig.eigenvectors.adjoint();
}

}  // namespace detail

/// Isometry h(theta): the gate product applied to the padding embedding
/// V0 = [I_dA; 0] of the input system into the (C, B) space.
inline Isometry evaluate_topology(const CircuitTopology &z,
                                  const RVec &theta) {
  if (theta.size() != z.p)
    throw input_error("evaluate_topology: expected " + std::to_string(z.p) +
                      " parameters");
  const Index full_dim = z.d_C * z.d_B;
  Mat v = Mat::Zero(full_dim, z.d_A);
  v.topRows(z.d_A) = Mat::Identity(z.d_A, z.d_A);
  for (const Gate &gate : z.gates) {
    Mat local = gate.kind == Gate::Kind::fixed
                    ? gate.matrix
                    : detail::rotation_unitary(gate.matrix,
                                               theta(gate.param_index));
    v = detail::embed_on_targets(local, gate.targets, z.factors) * v;
  }
  return Isometry{z.d_A, z.d_C, z.d_B, std::move(v)};
}

// ---------------------------------------------------------------------------
// Dimension estimation and audit
// ---------------------------------------------------------------------------

/// Rank of the central finite-difference Jacobian of
/// theta -> Choi(h(theta)) at the given point. The rank decision adds an
/// absolute floor covering finite-difference truncation and roundoff, so a
/// parameter the map does not depend on (a global phase, say) contributes
/// no rank.
inline Index generated_dim_estimate(const CircuitTopology &z, const RVec &theta,
                                    double fd_step = 1e-5,
                                    double rel_tol = kDefaultRelTol) {
  if (theta.size() != z.p)
    throw input_error("generated_dim_estimate: parameter count mismatch");
  if (fd_step <= 0.0)
    throw input_error("generated_dim_estimate: fd_step must be positive");
  if (z.p == 0)
    return 0;
  const Index dim = z.d_A * z.d_B;
  RMat jacobian(2 * dim * dim, z.p);
  for (Index k = 0; k < z.p; ++k) {
    RVec plus = theta, minus = theta;
    plus(k) += fd_step;
    minus(k) -= fd_step;
    Mat diff = (stinespring_to_choi(evaluate_topology(z, plus)).matrix -
                stinespring_to_choi(evaluate_topology(z, minus)).matrix) /
               (2.0 * fd_step);
    jacobian.col(k) = realvec(diff);
  }
  const double noise_floor =
      100.0 * (fd_step * fd_step +
               std::numeric_limits<double>::epsilon() / fd_step);
  return numerical_rank_real(jacobian, rel_tol,
                             std::max(noise_floor, rel_tol)).rank;
}

/// Checks the two necessary conditions for a topology to reach every
/// extreme channel (parameter count and environment size) and reports the
/// best Jacobian rank observed over random parameter points. The rank is a
/// lower bound on the generated-set dimension, never a certificate.
inline AuditReport audit_topology(const CircuitTopology &z, int n_points,
                                  double fd_step, double rel_tol,
                                  std::uint64_t seed) {
  if (n_points <= 0)
    throw input_error("audit_topology: n_points must be positive");
  AuditReport report;
  report.required_params = 2 * z.d_A * z.d_A * (z.d_B - 1);
  report.passes_param_bound = z.p >= report.required_params;
  report.required_env = z.d_A;
  report.passes_env_bound = z.d_C >= report.required_env;
  report.sample_count = n_points;

  const Index r_cap = std::min(z.d_C, z.d_A * z.d_B);
  report.target_dim = manifold_dim(z.d_A, z.d_B, r_cap);

  for (int point = 0; point < n_points; ++point) {
    std::mt19937_64 gen(derive_seed(seed, static_cast<std::uint64_t>(point)));
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    RVec theta(z.p);
    for (Index k = 0; k < z.p; ++k)
      theta(k) = angle(gen);
    report.estimated_generated_dim =
        std::max(report.estimated_generated_dim,
                 generated_dim_estimate(z, theta, fd_step, rel_tol));
  }
  return report;
}

inline json to_json(const AuditReport &r) {
  return json{{"passes_param_bound", r.passes_param_bound},
              {"required_params", r.required_params},
              {"passes_env_bound", r.passes_env_bound},
              {"required_env", r.required_env},
              {"estimated_generated_dim", r.estimated_generated_dim},
              {"target_dim", r.target_dim},
              {"sample_count", r.sample_count}};
}

}  // namespace chanfold
