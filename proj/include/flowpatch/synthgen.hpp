#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowpatch/hmm.hpp"
#include "flowpatch/rng.hpp"

namespace flowpatch::synthgen {

using hmm::ObservationSequence;

// Labeled synthetic sign series: patches of Pareto-distributed length,
// each a Bernoulli block biased toward its dominant sign.
struct PatchGenConfig {
  int num_patches = 1;
  double pareto_exponent = 2.0;  // mu > 1, P(l) ~ l^-mu
  int min_length = 1;            // x_min
  double bias = 0.95;            // dominant-sign probability, in (0.5, 1]
  std::uint64_t seed = 0;
  bool alternate_signs = true;

  void validate() const;
};

struct PatchTruth {
  int patch_id = 0;
  int dominant_sign = 0;  // +1 or -1
  int length = 0;
};

struct GeneratedSeries {
  ObservationSequence observations;  // symbol 0 = sell (-1), 1 = buy (+1)
  std::vector<PatchTruth> ground_truth;
};

// Continuous inverse-CDF Pareto draw ceiled to an integer >= min_length.
int pareto_length_from_uniform(const PatchGenConfig& config, double u);
int sample_pareto_length(const PatchGenConfig& config, Rng& rng);

GeneratedSeries generate_patched_series(const PatchGenConfig& config);

// Dressing for a generated sign series: timestamps on a fixed grid inside
// daily sessions, a spread-following price walk, uniform share sizes, and
// an optional interleaved noise member, so the series round-trips through
// the transactions CSV format.
struct TapeFixtureConfig {
  std::string member_id = "M0001";
  std::string start_date = "2004-01-05";
  double session_open_seconds = 9 * 3600.0;    // past midnight, whole minutes
  double session_close_seconds = 17 * 3600.0 + 1800.0;
  double trade_interval_seconds = 10.0;
  double base_price = 10.0;
  double tick = 0.01;
  bool with_quotes = true;
  long long min_shares = 10;
  long long max_shares = 100;
  double initiator_probability = 0.7;  // member is the aggressor
  double noise_fraction = 0.5;  // chance of a noise trade after each trade
  std::string noise_member_id = "NOISE";
  std::uint64_t seed = 1;

  void validate() const;
};

// Write the transactions CSV and the matching calendar JSON.
void emit_tape_fixture(const GeneratedSeries& series,
                       const TapeFixtureConfig& config,
                       const std::string& transactions_csv_path,
                       const std::string& calendar_json_path);

}  // namespace flowpatch::synthgen
