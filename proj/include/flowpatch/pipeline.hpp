#pragma once

#include <cstdint>
#include <exception>
#include <string>

#include "flowpatch/errors.hpp"

namespace flowpatch::pipeline {

// Everything a batch run needs; JSON keys match the field names.
struct RunConfig {
  // inputs
  std::string transactions_csv;
  std::string calendar_json;
  std::string segments_csv;  // optional external segmentation

  // member activity filter, applied per fitting period
  long long min_transactions = 1000;
  long long min_active_days = 200;

  // model settings
  int num_states = 3;
  int restarts = 10;
  double tolerance = 1e-6;
  int max_iterations = 500;
  bool use_hsmm = false;
  int max_sojourn = 50;
  bool single_period = false;  // fit the whole span instead of per year

  // patch filter
  long long n_min = 10;

  // stats settings
  double hill_quantile = 0.05;
  std::size_t num_bins = 10;

  // ingestion and reproducibility
  bool deduplicate_both_sides = false;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  void validate() const;  // throws ConfigError; checks paths exist
  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);
  std::string to_json() const;  // canonical echo, drives the run id
};

struct RunOutcome {
  int exit_code = 0;    // 0 ok, 2 config error, 3 data error, 4 numeric
  std::string run_dir;  // partial outputs stay here on failure
  std::string message;
};

// fit -> decode -> label -> extract per member-period, then pooled stats,
// asymmetry, and the optional segment cross-tabulation. All outputs land
// under <output_dir>/run-<config-hash>/ and are byte-stable given the seed.
RunOutcome run_pipeline(const RunConfig& config);

// Exception-to-exit-code policy shared with the command line front end.
int exit_code_for(const std::exception& e);

// FNV-1a, used for run ids and per-member seed derivation.
std::uint64_t fnv1a(const std::string& text);

}  // namespace flowpatch::pipeline
