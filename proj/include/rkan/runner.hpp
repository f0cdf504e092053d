#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rkan/config.hpp"

namespace rkan {

// One flat record per (config, seed). Doubles that do not apply to the
// experiment kind stay NaN and print as "nan" in the CSV.
struct ResultRow {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string layer;
  double K = std::numeric_limits<double>::quiet_NaN();
  double p = std::numeric_limits<double>::quiet_NaN();
  std::string mapping = "none";
  double train_mse = std::numeric_limits<double>::quiet_NaN();
  double test_mse = std::numeric_limits<double>::quiet_NaN();
  double root = std::numeric_limits<double>::quiet_NaN();
  double root_err = std::numeric_limits<double>::quiet_NaN();
  double max_abs_err = std::numeric_limits<double>::quiet_NaN();
  double wall_s = 0.0;
  std::string status = "ok";
  std::uint64_t config_hash = 0;  // carried on the side, not a CSV column
};

std::string fmt_g17(double v);

std::string csv_header();
std::string csv_format(const ResultRow& row);
ResultRow csv_parse_row(const std::string& line);

ResultRow run_one_seed(const ExperimentConfig& cfg, std::uint64_t seed);

// Finite-difference gradient audit of every layer kind (2-in 3-out KAN
// layers, K=3, p=2). One row per kind; max relative error lands in the
// max_abs_err column and status is "ok" iff it stays below 1e-5.
std::vector<ResultRow> gradcheck_rows(std::uint64_t seed);

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg, int parallel = 1);

std::string summary_line(const ExperimentConfig& cfg,
                         const std::vector<ResultRow>& rows);

// Seed precedence: RKAN_SEED env var, then the CLI list, then the config.
void override_seeds(ExperimentConfig& cfg, const std::string& cli_seeds);

std::vector<std::string> replicate_names();
std::vector<ExperimentConfig> replicate_bundle(const std::string& name);

// Runs every config, writes one CSV (header first, then a
// "# config_hash=<hex>" comment introducing each config's rows), prints one
// summary line per config. Returns 0 iff every row has status "ok".
int run_and_report(const std::vector<ExperimentConfig>& cfgs, int parallel,
                   const std::string& out_path);

}  // namespace rkan
