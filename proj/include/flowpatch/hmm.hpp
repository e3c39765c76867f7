#pragma once

#include <cstdint>
#include <vector>

#include "flowpatch/matrix.hpp"
#include "flowpatch/rng.hpp"

namespace flowpatch::hmm {

// Discrete-emission hidden Markov model lambda = (A, B, pi).
// Rows of transition and emission are probability distributions.
struct HmmModel {
  int num_states = 0;
  int num_symbols = 0;
  Matrix transition;            // N x N, a(i,j) = P(q_{t+1}=j | q_t=i)
  Matrix emission;              // N x M, b(j,k) = P(o_t=k | q_t=j)
  std::vector<double> initial;  // length N

  // Throws DomainError unless rows of A and B and pi are stochastic
  // within 1e-12 with entries in [0,1].
  void validate() const;
};

struct ObservationSequence {
  std::vector<int> symbols;

  std::size_t size() const { return symbols.size(); }
};

using StatePath = std::vector<int>;

struct FitConfig {
  int max_iterations = 500;
  double tolerance = 1e-6;
  int restarts = 10;
  std::uint64_t seed = 0;
};

struct FitReport {
  HmmModel fitted_model;
  std::vector<double> log_likelihood_trace;  // one entry per EM iteration
  int iterations = 0;
  bool converged = false;
  int restarts_used = 0;
  bool degenerate = false;  // single distinct symbol with N > 1
};

struct PosteriorDecode {
  Matrix gamma;  // T x N, gamma(t,i) = P(q_t = i | O, lambda)
  StatePath path;
  std::size_t tie_count = 0;  // positions where argmax was tied within 1e-12
};

struct Simulation {
  ObservationSequence observations;
  StatePath states;
};

struct SojournPmf {
  std::vector<double> pmf;  // p(l) for l = 1..max_len
  double tail_mass = 0.0;   // P(sojourn > max_len)
};

// ln P(O | lambda) by the scaled forward recursion. Returns -inf when the
// sequence has probability zero under the model.
double log_likelihood(const HmmModel& model, const ObservationSequence& obs);

// Exact P(O | lambda) by enumeration over all N^T state paths.
// Refuses when N^T exceeds 1e7.
double brute_force_likelihood(const HmmModel& model,
                              const ObservationSequence& obs);

// Baum-Welch maximum likelihood fit; best model over config.restarts
// random initializations, deterministic given config.seed.
FitReport fit_baum_welch(const ObservationSequence& obs, int num_states,
                         const FitConfig& config);

// Same EM loop started from an explicit initial model (single run).
FitReport fit_baum_welch_from(const HmmModel& initial_model,
                              const ObservationSequence& obs,
                              const FitConfig& config);

// Scaled forward-backward smoothing plus per-position argmax path.
PosteriorDecode posterior_decode(const HmmModel& model,
                                 const ObservationSequence& obs);

// Single most probable joint path, log-space DP, ties toward lower index.
StatePath viterbi_decode(const HmmModel& model, const ObservationSequence& obs);

// Draw a state path and observation sequence of the given length.
Simulation simulate(const HmmModel& model, std::size_t length,
                    std::uint64_t seed);

// Geometric run-length law p(l) = a_ii^(l-1) (1 - a_ii) for one state.
SojournPmf sojourn_pmf(const HmmModel& model, int state, int max_len);

}  // namespace flowpatch::hmm
