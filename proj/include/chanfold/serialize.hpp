#pragma once

#include "chanfold/channel.hpp"
#include "chanfold/decomposition.hpp"
#include "chanfold/extremality.hpp"
#include "chanfold/geometry.hpp"

#include <json.hpp>

#include <string>
#include <variant>

namespace chanfold {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Matrix encoding shared by every document:
//   {"rows": n, "cols": m, "data": [[re, im], ...]}   (row-major)
// Values round trip through decimal serialization within tolerance, not
// bit-exactly.
// ---------------------------------------------------------------------------

inline json matrix_to_json(const Mat &m) {
  json data = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      data.push_back({m(i, j).real(), m(i, j).imag()});
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

inline const json &require_field(const json &j, const char *key,
                                 const std::string &path) {
  if (!j.is_object())
    throw input_error("expected an object", path);
  auto it = j.find(key);
  if (it == j.end())
    throw input_error(std::string("missing field '") + key + "'", path);
  return *it;
}

inline Index int_field(const json &j, const char *key,
                       const std::string &path) {
  const json &field = require_field(j, key, path);
  if (!field.is_number_integer())
    throw input_error(std::string("field '") + key + "' must be an integer",
                      path + "/" + key);
  return field.get<Index>();
}

inline Mat matrix_from_json(const json &j, const std::string &path) {
  Index rows = int_field(j, "rows", path);
  Index cols = int_field(j, "cols", path);
  if (rows <= 0 || cols <= 0)
    throw input_error("matrix dimensions must be positive", path);
  const json &data = require_field(j, "data", path);
  if (!data.is_array() || static_cast<Index>(data.size()) != rows * cols)
    throw input_error("data must hold rows*cols [re, im] pairs",
                      path + "/data");
  Mat m(rows, cols);
  Index idx = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index j2 = 0; j2 < cols; ++j2, ++idx) {
      const json &entry = data.at(idx);
      if (!entry.is_array() || entry.size() != 2 ||
          !entry.at(0).is_number() || !entry.at(1).is_number())
        throw input_error("entries must be [re, im] pairs",
                          path + "/data/" + std::to_string(idx));
      m(i, j2) = Complex(entry.at(0).get<double>(), entry.at(1).get<double>());
    }
  require_finite(m, "matrix at " + path);
  return m;
}

// ---------------------------------------------------------------------------
// Channel documents
// ---------------------------------------------------------------------------

inline json to_json(const KrausChannel &k) {
  json ops = json::array();
  for (const Mat &op : k.ops)
    ops.push_back(matrix_to_json(op));
  return json{{"type", "kraus"}, {"s", k.s}, {"t", k.t}, {"ops", ops}};
}

inline json to_json(const ChoiState &c) {
  return json{{"type", "choi"},
              {"s", c.s},
              {"t", c.t},
              {"matrix", matrix_to_json(c.matrix)}};
}

using ChannelDocument = std::variant<KrausChannel, ChoiState>;

inline ChannelDocument channel_from_json(const json &j,
                                         const std::string &path = "") {
  const json &type = require_field(j, "type", path);
  Index s = int_field(j, "s", path);
  Index t = int_field(j, "t", path);
  if (type == "kraus") {
    const json &ops = require_field(j, "ops", path);
    if (!ops.is_array() || ops.empty())
      throw input_error("'ops' must be a non-empty array", path + "/ops");
    KrausChannel k{s, t, {}};
    for (std::size_t i = 0; i < ops.size(); ++i)
      k.ops.push_back(
          matrix_from_json(ops.at(i), path + "/ops/" + std::to_string(i)));
    return k;
  }
  if (type == "choi") {
    return ChoiState{
        s, t, matrix_from_json(require_field(j, "matrix", path),
                               path + "/matrix")};
  }
  throw input_error("channel type must be 'kraus' or 'choi'", path + "/type");
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline json to_json(const RankReport &r) {
  return json{{"rank", r.rank},
              {"singular_values", r.singular_values},
              {"threshold", r.threshold},
              {"margin", r.margin}};
}

inline json to_json(const ExtremalityReport &r) {
  return json{{"is_extreme", r.is_extreme},
              {"reason", to_string(r.reason)},
              {"products_rank", to_json(r.products_rank)},
              {"margin", r.margin}};
}

inline json to_json(const DimensionReport &r) {
  return json{{"s", r.s},
              {"t", r.t},
              {"r", r.r},
              {"formula_dim", r.formula_dim},
              {"numeric_dim", r.numeric_dim},
              {"point_seed", r.point_seed},
              {"margin", r.margin}};
}

inline json to_json(const SplitCertificate &c) {
  return json{{"lambda", matrix_to_json(c.lambda)},
              {"t_plus", c.t_plus},
              {"t_minus", c.t_minus},
              {"child_ranks", {c.child_ranks.first, c.child_ranks.second}}};
}

inline json to_json(const DecompositionResult &r) {
  json terms = json::array();
  for (const DecompositionTerm &term : r.terms)
    terms.push_back(json{{"weight", term.weight},
                         {"channel", to_json(term.channel)},
                         {"extremality_margin", term.extremality_margin}});
  json certs = json::array();
  for (const SplitCertificate &cert : r.certificates)
    certs.push_back(to_json(cert));
  json out{{"terms", terms},
           {"residual", r.residual},
           {"split_tree_depth", r.split_tree_depth},
           {"certificates", certs},
           {"term_count", r.terms.size()}};
  // Every extreme leaf has rank <= s, so the observed count can be compared
  // against the conjectured bound of t terms (Ruskai-Audenaert) for
  // rank <= s decompositions. Reported for interest, never asserted.
  if (!r.terms.empty()) {
    out["rank_leq_s_conjecture"] = json{
        {"conjectured_terms", r.terms[0].channel.t},
        {"within_conjectured_bound",
         static_cast<Index>(r.terms.size()) <= r.terms[0].channel.t}};
  }
  return out;
}

}  // namespace chanfold
