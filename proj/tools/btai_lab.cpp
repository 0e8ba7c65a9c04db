/**
 * btai-lab: run seeded benchmark batches from a config file and write the
 * aggregate results as CSV.
 *
 *   btai-lab run --config experiment.conf [--out results.csv] [--seed N]
 *                [--data-dir data]
 *   btai-lab presets
 *   btai-lab validate --config experiment.conf
 */

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "btai/bench/config.hpp"
#include "btai/bench/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Benchmark harness for tree-search active inference agents"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path = "results.csv";
  std::string data_dir = "data";
  std::optional<std::uint64_t> seed_override;

  auto* run = app.add_subcommand("run", "Run a batch and emit a CSV summary");
  run->add_option("--config", config_path, "Experiment config file")->required();
  run->add_option("--out", out_path, "Output CSV path");
  run->add_option("--seed", seed_override, "Override the base seed");
  run->add_option("--data-dir", data_dir, "Directory holding grid map files");

  auto* presets = app.add_subcommand("presets", "List the built-in presets");

  auto* validate = app.add_subcommand("validate", "Check a config file");
  validate->add_option("--config", config_path, "Experiment config file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (presets->parsed()) {
      for (const auto& [name, cfg] : btai::bench::preset_table()) {
        std::printf("%-22s env=%-12s agent=%-6s iterations=%zu\n", name.c_str(),
                    btai::bench::env_name(cfg.env),
                    btai::bench::agent_name(cfg.agent),
                    cfg.agent == btai::bench::AgentKind::kPomcp ? cfg.timeout
                    : cfg.agent == btai::bench::AgentKind::kAci ? cfg.horizon
                                                                : cfg.nb_planning);
      }
      return 0;
    }

    btai::bench::ExperimentConfig cfg = btai::bench::load_config(config_path);
    if (validate->parsed()) {
      std::printf("ok: %s agent=%s simulations=%zu\n",
                  btai::bench::env_name(cfg.env),
                  btai::bench::agent_name(cfg.agent), cfg.nb_simulations);
      return 0;
    }

    if (seed_override) cfg.seed = *seed_override;
    const auto records = btai::bench::run_batch(cfg, data_dir);
    const auto row = btai::bench::aggregate(records, cfg);
    btai::bench::emit_csv({row}, out_path);
    std::printf("%s %s iterations=%zu p_success=%.3f", row.env.c_str(),
                row.agent.c_str(), row.planning_iterations, row.p_success);
    if (row.p_solved) std::printf(" p_solved=%.3f", *row.p_solved);
    std::printf(" mean_time=%.3fs -> %s\n", row.mean_time_s, out_path.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
