#include "chanfold/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv) {
  CLI::App app{"chanfold: quantum channels as geometric objects"};
  app.require_subcommand(1);

  chanfold::RunConfig config;
  app.add_option("--seed", config.seed, "random seed")->capture_default_str();
  app.add_option("--tol-rank", config.tol_rank,
                 "relative singular-value cutoff for rank decisions")
      ->capture_default_str();
  app.add_option("--tol-psd", config.tol_psd,
                 "tolerance for positive-semidefinite checks")
      ->capture_default_str();
  // Global flags remain valid after the subcommand name.
  app.fallthrough();

  auto *convert = app.add_subcommand(
      "convert", "convert a channel between Kraus and Choi form");
  convert->add_option("--to", config.convert_to, "target representation")
      ->required()
      ->check(CLI::IsMember({"kraus", "choi"}));
  convert->add_option("input", config.input_path, "channel JSON")->required();
  convert->add_option("output", config.output_path, "converted channel JSON");

  auto *check = app.add_subcommand(
      "check-extreme", "test a channel against the extremality criterion");
  check->add_option("input", config.input_path, "channel JSON")->required();
  check->add_flag("--minimize", config.minimize,
                  "reduce a non-minimal Kraus list before testing");
  check->add_option("output", config.output_path, "report JSON");

  auto *random = app.add_subcommand(
      "random", "sample a Haar-random channel of fixed Kraus rank");
  random->add_option("--s", config.s, "input dimension")->required();
  random->add_option("--t", config.t, "output dimension")->required();
  random->add_option("--r", config.r, "Kraus rank")->required();
  random->add_option("output", config.output_path, "channel JSON");

  auto *decompose = app.add_subcommand(
      "decompose", "decompose a channel into extreme channels");
  decompose->add_option("input", config.input_path, "channel JSON")
      ->required();
  decompose->add_option("--max-depth", config.max_depth,
                        "split depth limit (default: rank - 1)");
  decompose->add_option("output", config.output_path, "decomposition JSON");

  auto *dim = app.add_subcommand(
      "dim-check", "verify the channel-manifold dimension numerically");
  dim->add_option("--s", config.s, "input dimension")->required();
  dim->add_option("--t", config.t, "output dimension")->required();
  dim->add_option("--r", config.r, "Kraus rank")->required();
  dim->add_option("--seeds", config.seeds, "number of sample points")
      ->capture_default_str();

  auto *audit = app.add_subcommand(
      "audit", "audit a circuit topology against the parameter lower bound");
  audit->add_option("input", config.input_path, "topology JSON")->required();
  audit->add_option("--points", config.points, "parameter points to sample")
      ->capture_default_str();
  audit->add_option("--fd-step", config.fd_step, "finite-difference step")
      ->capture_default_str();
  audit->add_option("output", config.output_path, "report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cout << chanfold::json{{"code", "usage_error"},
                                {"path", ""},
                                {"message", e.what()}}.dump(2)
              << "\n";
    return 2;
  }

  config.subcommand = app.get_subcommands().front()->get_name();
  return chanfold::run(config, std::cout);
}
