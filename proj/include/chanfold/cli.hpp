#pragma once

#include "chanfold/serialize.hpp"
#include "chanfold/topology.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>

#ifndef CHANFOLD_VERSION
#define CHANFOLD_VERSION "0.0.0"
#endif

namespace chanfold {

/// File-level failure (missing input, unwritable output): exit code 3.
class io_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;
  double tol_rank = 1e-10;
  double tol_psd = 1e-10;
  std::uint64_t seed = 0;
  std::string input_path;
  std::string output_path;

  std::string convert_to;  // convert: "kraus" or "choi"
  bool minimize = false;   // check-extreme
  Index s = 2;             // random / dim-check
  Index t = 2;
  Index r = 1;
  int seeds = 1;           // dim-check
  Index max_depth = -1;    // decompose
  int points = 3;          // audit
  double fd_step = 1e-5;   // audit
};

namespace detail {

inline json read_json_file(const std::string &path) {
  std::ifstream in(path);
  if (!in.good())
    throw io_error("cannot open input file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error &err) {
    throw input_error(std::string("malformed JSON: ") + err.what(), path);
  }
  return doc;
}

inline void write_json_file(const std::string &path, const json &doc) {
  std::ofstream out(path);
  if (!out.good())
    throw io_error("cannot open output file: " + path);
  out << doc.dump(2) << "\n";
  if (!out.good())
    throw io_error("failed writing output file: " + path);
}

inline std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json echo_config(const RunConfig &config) {
  return json{{"subcommand", config.subcommand},
              {"tol_rank", config.tol_rank},
              {"tol_psd", config.tol_psd},
              {"seed", config.seed},
              {"input", config.input_path},
              {"output", config.output_path},
              {"to", config.convert_to},
              {"minimize", config.minimize},
              {"s", config.s},
              {"t", config.t},
              {"r", config.r},
              {"seeds", config.seeds},
              {"max_depth", config.max_depth},
              {"points", config.points},
              {"fd_step", config.fd_step}};
}

inline KrausChannel as_kraus(const ChannelDocument &doc, double tol_rank,
                             double tol_psd) {
  if (std::holds_alternative<KrausChannel>(doc)) {
    KrausChannel k = std::get<KrausChannel>(doc);
    validate_kraus(k);
    return k;
  }
  return choi_to_kraus(std::get<ChoiState>(doc), tol_rank, tol_psd);
}

inline ChoiState as_choi(const ChannelDocument &doc, double tol_psd) {
  if (std::holds_alternative<ChoiState>(doc)) {
    ChoiState c = std::get<ChoiState>(doc);
    validate_choi(c, tol_psd, tol_psd);
    return c;
  }
  return kraus_to_choi(std::get<KrausChannel>(doc));
}

inline json run_convert(const RunConfig &config) {
  ChannelDocument doc =
      channel_from_json(read_json_file(config.input_path), config.input_path);
  if (config.convert_to == "kraus")
    return to_json(as_kraus(doc, config.tol_rank, config.tol_psd));
  if (config.convert_to == "choi")
    return to_json(as_choi(doc, config.tol_psd));
  throw input_error("convert: --to must be 'kraus' or 'choi'");
}

inline json run_check_extreme(const RunConfig &config) {
  ChannelDocument doc =
      channel_from_json(read_json_file(config.input_path), config.input_path);
  KrausChannel k = as_kraus(doc, config.tol_rank, config.tol_psd);
  if (config.minimize && !is_minimal(k, config.tol_rank).is_minimal)
    k = choi_to_kraus(kraus_to_choi(k), config.tol_rank, config.tol_psd);
  return to_json(is_extreme(k, config.tol_rank));
}

inline json run_random(const RunConfig &config) {
  return to_json(random_channel(config.s, config.t, config.r, config.seed,
                                config.tol_rank));
}

inline json run_decompose(const RunConfig &config) {
  ChannelDocument doc =
      channel_from_json(read_json_file(config.input_path), config.input_path);
  ChoiState c = as_choi(doc, config.tol_psd);
  return to_json(decompose_extreme(c, config.tol_rank, config.max_depth));
}

inline json run_dim_check(const RunConfig &config) {
  if (config.seeds <= 0)
    throw input_error("dim-check: --seeds must be positive");
  json reports = json::array();
  for (int k = 0; k < config.seeds; ++k)
    reports.push_back(to_json(numeric_choi_manifold_dim(
        config.s, config.t, config.r,
        config.seed + static_cast<std::uint64_t>(k), config.tol_rank)));
  return reports;
}

inline json run_audit(const RunConfig &config) {
  CircuitTopology z = parse_topology(read_json_file(config.input_path));
  return to_json(audit_topology(z, config.points, config.fd_step,
                                config.tol_rank, config.seed));
}

}  // namespace detail

/// Executes one subcommand. The full self-describing report goes to `out`;
/// when an output path is configured the bare payload is written there as
/// well. Returns the process exit status: 0 success, 2 validation error
/// (with a machine-readable diagnostic), 3 I/O failure.
inline int run(const RunConfig &config, std::ostream &out) {
  try {
    json payload;
    if (config.subcommand == "convert")
      payload = detail::run_convert(config);
    else if (config.subcommand == "check-extreme")
      payload = detail::run_check_extreme(config);
    else if (config.subcommand == "random")
      payload = detail::run_random(config);
    else if (config.subcommand == "decompose")
      payload = detail::run_decompose(config);
    else if (config.subcommand == "dim-check")
      payload = detail::run_dim_check(config);
    else if (config.subcommand == "audit")
      payload = detail::run_audit(config);
    else
      throw input_error("unknown subcommand: " + config.subcommand);

    json report{{"tool", "chanfold"},
                {"version", CHANFOLD_VERSION},
                {"command", config.subcommand},
                {"config", detail::echo_config(config)},
                {"seed", config.seed},
                {"timestamp", detail::iso_timestamp()},
                {"report", payload}};
    if (!config.output_path.empty())
      detail::write_json_file(config.output_path, payload);
    out << report.dump(2) << "\n";
    return 0;
  } catch (const io_error &err) {
    out << json{{"code", "io_error"}, {"path", config.input_path},
                {"message", err.what()}}.dump(2)
        << "\n";
    return 3;
  } catch (const input_error &err) {
    out << json{{"code", "input_error"}, {"path", err.path()},
                {"message", err.what()}}.dump(2)
        << "\n";
    return 2;
  } catch (const numeric_error &err) {
    out << json{{"code", "numeric_error"}, {"path", ""},
                {"message", err.what()}}.dump(2)
        << "\n";
    return 2;
  }
}

}  // namespace chanfold
