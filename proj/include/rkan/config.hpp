#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rkan/layers.hpp"

namespace rkan {

// Fully resolved experiment description. Defaults depend on the experiment
// kind and layer family; parse_config fills them in, so a constructed config
// is always complete.
struct ExperimentConfig {
  // [experiment]
  std::string experiment = "regression";  // regression, lane-emden, elliptic-pde, gradcheck
  std::string target = "F2";              // regression targets F1/F2/F3
  int w = 0;                              // Lane-Emden polytropic index, 0..4
  bool normalize_inputs = false;          // physics experiments default true

  // [network]
  std::string layer = "jacobi-rkan";  // jacobi-rkan, pade-rkan, fjacobi-rkan, fpade-rkan
  std::string mode = "activation-mlp";  // activation-mlp or kan
  int K = 2;
  int p = 2;                   // Pade denominator degree
  std::string mapping;         // resolved per layer family; "none" for Pade
  std::string squash;          // resolved per layer family
  std::vector<long> architecture = {1, 10, 1};

  // [optimizer]
  std::string optimizer = "lbfgs";
  int epochs = 50;
  double learning_rate = 0.001;

  // [output]
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string out = "results.csv";
};

// Parse a flat INI-style document: [section] headers (experiment, network,
// optimizer, output), key = value lines, full-line # or ; comments. Unknown
// sections or keys and malformed values are ConfigErrors carrying the line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Canonical one-line-per-field rendering of everything that defines the runs
// (seeds and output path excluded), and its FNV-1a 64 hash, which links CSV
// rows back to the producing config.
std::string config_canonical(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

// Instantiate the configured network, including the fixed input-normalization
// stage when normalize_inputs is set.
Network build_network(const ExperimentConfig& cfg);

}  // namespace rkan
