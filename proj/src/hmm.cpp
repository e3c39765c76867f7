#include "flowpatch/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "flowpatch/errors.hpp"

namespace flowpatch::hmm {

namespace {

constexpr double kProbFloor = 1e-12;
constexpr double kRowSumTol = 1e-12;
const double kNegInf = -std::numeric_limits<double>::infinity();

void check_stochastic_row(std::span<const double> row, const std::string& what) {
  double sum = 0.0;
  for (double v : row) {
    if (v < 0.0 || v > 1.0 || !std::isfinite(v))
      throw DomainError(what + ": entry outside [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kRowSumTol)
    throw DomainError(what + ": row sums to " + std::to_string(sum));
}

void check_obs(const HmmModel& model, const ObservationSequence& obs) {
  if (obs.symbols.empty()) throw DomainError("empty observation sequence");
  for (int s : obs.symbols)
    if (s < 0 || s >= model.num_symbols)
      throw DomainError("symbol index " + std::to_string(s) +
                        " outside [0," + std::to_string(model.num_symbols) + ")");
}

// One scaled forward pass. Fills alpha (T x N, row-normalized) and the
// per-step normalizers c_t; returns ln P = sum ln c_t, or -inf if some
// step has zero total probability.
double scaled_forward(const HmmModel& model, const std::vector<int>& obs,
                      Matrix& alpha, std::vector<double>& scale) {
  const std::size_t T = obs.size();
  const int N = model.num_states;
  alpha = Matrix(T, N);
  scale.assign(T, 0.0);

  double log_prob = 0.0;
  for (int i = 0; i < N; ++i)
    alpha(0, i) = model.initial[i] * model.emission(i, obs[0]);
  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0) {
      for (int j = 0; j < N; ++j) {
        double sum = 0.0;
        for (int i = 0; i < N; ++i) sum += alpha(t - 1, i) * model.transition(i, j);
        alpha(t, j) = sum * model.emission(j, obs[t]);
      }
    }
    double c = 0.0;
    for (int i = 0; i < N; ++i) c += alpha(t, i);
    if (c <= 0.0) return kNegInf;
    scale[t] = c;
    double inv = 1.0 / c;
    for (int i = 0; i < N; ++i) alpha(t, i) *= inv;
    log_prob += std::log(c);
  }
  return log_prob;
}

// Backward pass matching scaled_forward's normalizers.
void scaled_backward(const HmmModel& model, const std::vector<int>& obs,
                     const std::vector<double>& scale, Matrix& beta) {
  const std::size_t T = obs.size();
  const int N = model.num_states;
  beta = Matrix(T, N);
  for (int i = 0; i < N; ++i) beta(T - 1, i) = 1.0;
  for (std::size_t t = T - 1; t-- > 0;) {
    double inv = 1.0 / scale[t + 1];
    for (int i = 0; i < N; ++i) {
      double sum = 0.0;
      for (int j = 0; j < N; ++j)
        sum += model.transition(i, j) * model.emission(j, obs[t + 1]) *
               beta(t + 1, j);
      beta(t, i) = sum * inv;
    }
  }
}

void floor_and_normalize(std::span<double> row) {
  for (double& v : row)
    if (v < kProbFloor) v = kProbFloor;
  double sum = std::accumulate(row.begin(), row.end(), 0.0);
  for (double& v : row) v /= sum;
}

// One EM run from the given starting point.
FitReport em_run(HmmModel model, const ObservationSequence& obs,
                 const FitConfig& config) {
  const std::vector<int>& o = obs.symbols;
  const std::size_t T = o.size();
  const int N = model.num_states;
  const int M = model.num_symbols;

  FitReport report;
  Matrix alpha, beta;
  std::vector<double> scale;
  double prev_ll = kNegInf;
  bool converged = false;
  int iterations = 0;

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    double ll = scaled_forward(model, o, alpha, scale);
    if (!std::isfinite(ll))
      throw NumericError("zero-probability observation during EM");
    report.log_likelihood_trace.push_back(ll);
    ++iterations;
    if (iter > 0 && std::abs(ll - prev_ll) < config.tolerance) {
      converged = true;
      break;
    }
    prev_ll = ll;

    scaled_backward(model, o, scale, beta);

    // Accumulators: expected transition counts, emission counts, gamma sums.
    Matrix trans_num(N, N), emit_num(N, M);
    std::vector<double> gamma_sum(N, 0.0);  // over t = 0..T-2
    std::vector<double> gamma0(N, 0.0);

    std::vector<double> gamma(N);
    for (std::size_t t = 0; t < T; ++t) {
      double norm = 0.0;
      for (int i = 0; i < N; ++i) {
        gamma[i] = alpha(t, i) * beta(t, i);
        norm += gamma[i];
      }
      for (int i = 0; i < N; ++i) gamma[i] /= norm;
      if (t == 0)
        for (int i = 0; i < N; ++i) gamma0[i] = gamma[i];
      for (int i = 0; i < N; ++i) emit_num(i, o[t]) += gamma[i];
      if (t + 1 < T) {
        double inv = 1.0 / scale[t + 1];
        for (int i = 0; i < N; ++i) {
          gamma_sum[i] += gamma[i];
          for (int j = 0; j < N; ++j)
            trans_num(i, j) += alpha(t, i) * model.transition(i, j) *
                               model.emission(j, o[t + 1]) * beta(t + 1, j) * inv;
        }
      }
    }

    if (N > 1 && T > 1) {
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
          model.transition(i, j) = trans_num(i, j) / gamma_sum[i];
    }
    for (int i = 0; i < N; ++i) {
      double total = 0.0;
      for (int k = 0; k < M; ++k) total += emit_num(i, k);
      for (int k = 0; k < M; ++k) model.emission(i, k) = emit_num(i, k) / total;
    }
    model.initial = gamma0;

    for (int i = 0; i < N; ++i) {
      floor_and_normalize(model.transition.row(i));
      floor_and_normalize(model.emission.row(i));
    }
    floor_and_normalize(model.initial);
  }

  report.fitted_model = std::move(model);
  report.iterations = iterations;
  report.converged = converged;
  return report;
}

HmmModel random_model(int num_states, int num_symbols, Rng& rng) {
  HmmModel m;
  m.num_states = num_states;
  m.num_symbols = num_symbols;
  m.transition = Matrix(num_states, num_states);
  m.emission = Matrix(num_states, num_symbols);
  m.initial.resize(num_states);
  auto dirichlet_row = [&rng](std::span<double> row) {
    double sum = 0.0;
    for (double& v : row) {
      v = rng.exponential();
      sum += v;
    }
    for (double& v : row) v /= sum;
  };
  for (int i = 0; i < num_states; ++i) {
    dirichlet_row(m.transition.row(i));
    dirichlet_row(m.emission.row(i));
  }
  dirichlet_row(m.initial);
  return m;
}

}  // namespace

void HmmModel::validate() const {
  if (num_states < 1) throw DomainError("num_states must be >= 1");
  if (num_symbols < 1) throw DomainError("num_symbols must be >= 1");
  if (transition.rows() != static_cast<std::size_t>(num_states) ||
      transition.cols() != static_cast<std::size_t>(num_states))
    throw DomainError("transition matrix shape mismatch");
  if (emission.rows() != static_cast<std::size_t>(num_states) ||
      emission.cols() != static_cast<std::size_t>(num_symbols))
    throw DomainError("emission matrix shape mismatch");
  if (initial.size() != static_cast<std::size_t>(num_states))
    throw DomainError("initial vector length mismatch");
  for (int i = 0; i < num_states; ++i) {
    check_stochastic_row(transition.row(i), "transition row " + std::to_string(i));
    check_stochastic_row(emission.row(i), "emission row " + std::to_string(i));
  }
  check_stochastic_row(initial, "initial distribution");
}

double log_likelihood(const HmmModel& model, const ObservationSequence& obs) {
  model.validate();
  check_obs(model, obs);
  Matrix alpha;
  std::vector<double> scale;
  return scaled_forward(model, obs.symbols, alpha, scale);
}

double brute_force_likelihood(const HmmModel& model,
                              const ObservationSequence& obs) {
  model.validate();
  check_obs(model, obs);
  const std::size_t T = obs.size();
  const int N = model.num_states;
  double paths = std::pow(static_cast<double>(N), static_cast<double>(T));
  if (paths > 1e7)
    throw DomainError("brute_force_likelihood: N^T exceeds 1e7");

  const std::vector<int>& o = obs.symbols;
  double total = 0.0;
  std::vector<int> q(T, 0);
  while (true) {
    double p = model.initial[q[0]] * model.emission(q[0], o[0]);
    for (std::size_t t = 1; t < T && p > 0.0; ++t)
      p *= model.transition(q[t - 1], q[t]) * model.emission(q[t], o[t]);
    total += p;
    // next path in odometer order
    std::size_t pos = 0;
    while (pos < T && ++q[pos] == N) q[pos++] = 0;
    if (pos == T) break;
  }
  return total;
}

FitReport fit_baum_welch(const ObservationSequence& obs, int num_states,
                         const FitConfig& config) {
  if (num_states < 1) throw DomainError("num_states must be >= 1");
  if (obs.symbols.empty()) throw DomainError("empty observation sequence");
  int max_symbol = *std::max_element(obs.symbols.begin(), obs.symbols.end());
  int min_symbol = *std::min_element(obs.symbols.begin(), obs.symbols.end());
  if (min_symbol < 0) throw DomainError("negative symbol index");
  const int num_symbols = std::max(2, max_symbol + 1);
  if (obs.size() < static_cast<std::size_t>(10 * num_states * num_symbols))
    throw DomainError("sequence too short to fit: need at least " +
                      std::to_string(10 * num_states * num_symbols) +
                      " observations");
  if (config.restarts < 1) throw DomainError("restarts must be >= 1");

  Rng rng(config.seed);
  FitReport best;
  bool have_best = false;
  for (int r = 0; r < config.restarts; ++r) {
    HmmModel init = random_model(num_states, num_symbols, rng);
    FitReport report = em_run(std::move(init), obs, config);
    if (!have_best || report.log_likelihood_trace.back() >
                          best.log_likelihood_trace.back()) {
      best = std::move(report);
      have_best = true;
    }
  }
  best.restarts_used = config.restarts;
  best.degenerate = (min_symbol == max_symbol) && num_states > 1;
  return best;
}

FitReport fit_baum_welch_from(const HmmModel& initial_model,
                              const ObservationSequence& obs,
                              const FitConfig& config) {
  initial_model.validate();
  check_obs(initial_model, obs);
  FitReport report = em_run(initial_model, obs, config);
  report.restarts_used = 1;
  int max_symbol = *std::max_element(obs.symbols.begin(), obs.symbols.end());
  int min_symbol = *std::min_element(obs.symbols.begin(), obs.symbols.end());
  report.degenerate = (min_symbol == max_symbol) && initial_model.num_states > 1;
  return report;
}

PosteriorDecode posterior_decode(const HmmModel& model,
                                 const ObservationSequence& obs) {
  model.validate();
  check_obs(model, obs);
  const std::size_t T = obs.size();
  const int N = model.num_states;

  Matrix alpha, beta;
  std::vector<double> scale;
  double ll = scaled_forward(model, obs.symbols, alpha, scale);
  if (!std::isfinite(ll))
    throw NumericError("observation sequence has zero probability");
  scaled_backward(model, obs.symbols, scale, beta);

  PosteriorDecode out;
  out.gamma = Matrix(T, N);
  out.path.resize(T);
  constexpr double kTieTol = 1e-12;
  for (std::size_t t = 0; t < T; ++t) {
    double norm = 0.0;
    for (int i = 0; i < N; ++i) {
      out.gamma(t, i) = alpha(t, i) * beta(t, i);
      norm += out.gamma(t, i);
    }
    int arg = 0;
    for (int i = 0; i < N; ++i) {
      out.gamma(t, i) /= norm;
      if (out.gamma(t, i) > out.gamma(t, arg)) arg = i;
    }
    for (int i = 0; i < N; ++i)
      if (i != arg && std::abs(out.gamma(t, i) - out.gamma(t, arg)) <= kTieTol) {
        ++out.tie_count;
        break;
      }
    out.path[t] = arg;
  }
  return out;
}

StatePath viterbi_decode(const HmmModel& model, const ObservationSequence& obs) {
  model.validate();
  check_obs(model, obs);
  const std::vector<int>& o = obs.symbols;
  const std::size_t T = o.size();
  const int N = model.num_states;

  auto safe_log = [](double x) { return x > 0.0 ? std::log(x) : kNegInf; };

  Matrix delta(T, N);
  std::vector<std::vector<int>> back(T, std::vector<int>(N, 0));
  for (int i = 0; i < N; ++i)
    delta(0, i) = safe_log(model.initial[i]) + safe_log(model.emission(i, o[0]));
  for (std::size_t t = 1; t < T; ++t) {
    for (int j = 0; j < N; ++j) {
      double best = kNegInf;
      int arg = 0;
      for (int i = 0; i < N; ++i) {
        double cand = delta(t - 1, i) + safe_log(model.transition(i, j));
        if (cand > best) {
          best = cand;
          arg = i;
        }
      }
      delta(t, j) = best + safe_log(model.emission(j, o[t]));
      back[t][j] = arg;
    }
  }
  StatePath path(T);
  int arg = 0;
  for (int i = 1; i < N; ++i)
    if (delta(T - 1, i) > delta(T - 1, arg)) arg = i;
  path[T - 1] = arg;
  for (std::size_t t = T - 1; t-- > 0;) path[t] = back[t + 1][path[t + 1]];
  return path;
}

Simulation simulate(const HmmModel& model, std::size_t length,
                    std::uint64_t seed) {
  model.validate();
  if (length < 1) throw DomainError("simulation length must be >= 1");
  Rng rng(seed);
  Simulation sim;
  sim.states.resize(length);
  sim.observations.symbols.resize(length);
  int q = rng.categorical(model.initial);
  for (std::size_t t = 0; t < length; ++t) {
    if (t > 0) q = rng.categorical(model.transition.row(q));
    sim.states[t] = q;
    sim.observations.symbols[t] = rng.categorical(model.emission.row(q));
  }
  return sim;
}

SojournPmf sojourn_pmf(const HmmModel& model, int state, int max_len) {
  model.validate();
  if (state < 0 || state >= model.num_states)
    throw DomainError("invalid state index");
  if (max_len < 1) throw DomainError("max_len must be >= 1");
  double a = model.transition(state, state);
  if (a >= 1.0)
    throw DomainError("sojourn_pmf: a_ii = 1 gives infinite expected sojourn");
  SojournPmf out;
  out.pmf.resize(max_len);
  double power = 1.0;  // a^(l-1)
  for (int l = 1; l <= max_len; ++l) {
    out.pmf[l - 1] = power * (1.0 - a);
    power *= a;
  }
  out.tail_mass = power;  // a^max_len
  return out;
}

}  // namespace flowpatch::hmm
