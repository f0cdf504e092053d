#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rkan/error.hpp"
#include "rkan/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rational Kolmogorov-Arnold network toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_path, seed_list, bundle;
  int parallel = 1;

  CLI::App* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config", config_path, "config file (flat key = value sections)")
      ->required();
  run->add_option("--out", out_path, "output CSV path (overrides the config)");
  run->add_option("--seeds", seed_list, "comma-separated seed list (overrides the config)");
  run->add_option("--parallel", parallel, "run up to N seeds concurrently")
      ->check(CLI::PositiveNumber);

  CLI::App* grad = app.add_subcommand(
      "gradcheck", "finite-difference gradient audit of every layer kind");
  grad->add_option("--out", out_path, "output CSV path");

  CLI::App* rep = app.add_subcommand("replicate", "run a bundled replication study");
  rep->add_option("name", bundle, "table1, table2, table3, table5, or pde")->required();
  rep->add_option("--out", out_path, "output CSV path");
  rep->add_option("--parallel", parallel, "run up to N seeds concurrently")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<rkan::ExperimentConfig> cfgs;
    std::string out = out_path;
    if (run->parsed()) {
      rkan::ExperimentConfig cfg = rkan::parse_config_file(config_path);
      rkan::override_seeds(cfg, seed_list);
      if (out.empty()) out = cfg.out;
      cfgs.push_back(std::move(cfg));
    } else if (grad->parsed()) {
      rkan::ExperimentConfig cfg =
          rkan::parse_config("[experiment]\nexperiment = gradcheck\n");
      rkan::override_seeds(cfg, "");
      if (out.empty()) out = "gradcheck.csv";
      cfgs.push_back(std::move(cfg));
    } else {
      cfgs = rkan::replicate_bundle(bundle);
      for (rkan::ExperimentConfig& cfg : cfgs) rkan::override_seeds(cfg, "");
      if (out.empty()) out = bundle + ".csv";
    }
    return rkan::run_and_report(cfgs, parallel, out);
  } catch (const rkan::Error& e) {
    std::cerr << "rkan: " << e.what() << "\n";
    return 2;
  }
}
