#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "flowpatch/hmm.hpp"
#include "flowpatch/matrix.hpp"

namespace flowpatch::hsmm {

using hmm::ObservationSequence;
using hmm::Simulation;
using hmm::StatePath;

// Explicit-duration hidden semi-Markov model: zero-diagonal state
// transitions plus a free-form per-state sojourn distribution d_j(l)
// over l = 1..max_sojourn. The final segment of a sequence is treated
// as right-censored (survivor mass sum_{l' >= l} d_j(l')).
struct HsmmModel {
  int num_states = 0;
  int num_symbols = 0;
  Matrix transition;            // N x N, zero diagonal
  Matrix emission;              // N x M
  std::vector<double> initial;  // length N
  Matrix sojourn;               // N x max_sojourn, row j = d_j(1..L)
  int max_sojourn = 0;

  void validate() const;
};

struct FitConfig {
  int max_iterations = 100;
  double tolerance = 1e-6;
  int restarts = 3;
  std::uint64_t seed = 0;
  // Abort EM (returning the current parameters) once this many seconds
  // have elapsed; 0 disables the budget.
  double time_budget_seconds = 0.0;
};

struct HsmmFitReport {
  std::vector<double> log_likelihood_trace;
  int iterations = 0;
  bool converged = false;
  int restarts_used = 0;
  bool short_sequence_warning = false;  // fewer than 20,000 observations
  bool budget_exhausted = false;
};

struct HsmmDecode {
  StatePath path;
  // Runs in a marginal-argmax path may exceed max_sojourn when adjacent
  // segments of one state merge; counted here rather than forbidden.
  std::size_t runs_exceeding_max_sojourn = 0;
};

// Nonparametric EM over (transition, emission, initial, sojourn) with the
// censored-tail boundary term; O(T * N * max_sojourn) per iteration.
std::pair<HsmmModel, HsmmFitReport> fit_hsmm(const ObservationSequence& obs,
                                             int num_states, int max_sojourn,
                                             const FitConfig& config);

// Smoothed state posterior P(q_t = j | O), T x N.
Matrix hsmm_posterior(const HsmmModel& model, const ObservationSequence& obs);

// Per-position most probable state from the smoothed posterior,
// ties toward lower state index.
HsmmDecode decode_hsmm(const HsmmModel& model, const ObservationSequence& obs);

// ln P(O | model) including the right-censored final segment.
double log_likelihood(const HsmmModel& model, const ObservationSequence& obs);

// Draw segments (state, sojourn, emissions) and truncate at `length`.
Simulation simulate_hsmm(const HsmmModel& model, std::size_t length,
                         std::uint64_t seed);

}  // namespace flowpatch::hsmm
