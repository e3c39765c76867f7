#include "flowpatch/hsmm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "flowpatch/errors.hpp"
#include "flowpatch/rng.hpp"

namespace flowpatch::hsmm {

namespace {

constexpr double kProbFloor = 1e-12;
const double kNegInf = -std::numeric_limits<double>::infinity();

void check_obs(const HsmmModel& model, const ObservationSequence& obs) {
  if (obs.symbols.empty()) throw DomainError("empty observation sequence");
  for (int s : obs.symbols)
    if (s < 0 || s >= model.num_symbols)
      throw DomainError("symbol index " + std::to_string(s) + " outside [0," +
                        std::to_string(model.num_symbols) + ")");
}

// Expanded-state chain over (state j, remaining duration r), r = 1..L.
// (j, r>1) -> (j, r-1) deterministically; (j, 1) -> (k, r') with
// probability p(j,k) d_k(r'). Right censoring falls out of summing over
// all remaining durations at the final step.
struct ForwardPass {
  Matrix alpha;                // T x (N*L), row-normalized
  std::vector<double> scale;   // per-step normalizers
  double log_likelihood = 0.0;
};

// One scaled forward sweep; returns false when a step had zero mass.
bool scaled_forward(const HsmmModel& m, const std::vector<int>& o,
                    ForwardPass& fwd) {
  const std::size_t T = o.size();
  const int N = m.num_states;
  const int L = m.max_sojourn;
  const int E = N * L;
  fwd.alpha = Matrix(T, E);
  fwd.scale.assign(T, 0.0);
  fwd.log_likelihood = 0.0;

  std::vector<double> entry(N, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    double* cur = &fwd.alpha.data()[t * E];
    if (t == 0) {
      for (int j = 0; j < N; ++j) {
        double b = m.emission(j, o[0]);
        for (int r = 0; r < L; ++r)
          cur[j * L + r] = m.initial[j] * m.sojourn(j, r) * b;
      }
    } else {
      const double* prev = &fwd.alpha.data()[(t - 1) * E];
      // Mass entering each state at t through a segment boundary.
      for (int k = 0; k < N; ++k) {
        double e = 0.0;
        for (int i = 0; i < N; ++i)
          if (i != k) e += prev[i * L + 0] * m.transition(i, k);
        entry[k] = e;
      }
      for (int j = 0; j < N; ++j) {
        double b = m.emission(j, o[t]);
        for (int r = 0; r < L; ++r) {
          double cont = (r + 1 < L) ? prev[j * L + r + 1] : 0.0;
          cur[j * L + r] = (cont + entry[j] * m.sojourn(j, r)) * b;
        }
      }
    }
    double c = 0.0;
    for (int e = 0; e < E; ++e) c += cur[e];
    if (c <= 0.0) return false;
    fwd.scale[t] = c;
    double inv = 1.0 / c;
    for (int e = 0; e < E; ++e) cur[e] *= inv;
    fwd.log_likelihood += std::log(c);
  }
  return true;
}

struct SmoothStats {
  Matrix gamma;      // T x N state occupancy
  Matrix trans_num;  // N x N expected boundary transitions
  Matrix dur_num;    // N x L expected segment-duration counts
  Matrix emit_num;   // N x M expected emission counts
};

// Backward sweep over the expanded chain, accumulating the EM statistics
// against the stored forward pass.
void smooth(const HsmmModel& m, const std::vector<int>& o,
            const ForwardPass& fwd, SmoothStats& st) {
  const std::size_t T = o.size();
  const int N = m.num_states;
  const int L = m.max_sojourn;
  const int E = N * L;

  st.gamma = Matrix(T, N);
  st.trans_num = Matrix(N, N);
  st.dur_num = Matrix(N, L);
  st.emit_num = Matrix(N, m.num_symbols);

  std::vector<double> beta_next(E, 0.0), beta_cur(E, 1.0);
  std::vector<double> w(N, 0.0);  // sum_r d_k(r) b_k(o_{t+1}) beta_{t+1}(k,r)

  for (std::size_t t = T; t-- > 0;) {
    const double* a = &fwd.alpha.data()[t * E];
    if (t + 1 < T) {
      std::swap(beta_next, beta_cur);
      const double inv = 1.0 / fwd.scale[t + 1];
      // Entry weights into each state at t+1 and duration statistics.
      for (int k = 0; k < N; ++k) {
        double ein = 0.0;
        for (int i = 0; i < N; ++i)
          if (i != k) ein += a[i * L + 0] * m.transition(i, k);
        double b = m.emission(k, o[t + 1]);
        double wk = 0.0;
        for (int r = 0; r < L; ++r) {
          double term = m.sojourn(k, r) * b * beta_next[k * L + r];
          wk += term;
          st.dur_num(k, r) += ein * term * inv;
        }
        w[k] = wk * inv;
      }
      // Boundary transition counts i -> k at (t, t+1).
      for (int i = 0; i < N; ++i) {
        double a1 = a[i * L + 0];
        if (a1 == 0.0) continue;
        for (int k = 0; k < N; ++k)
          if (k != i) st.trans_num(i, k) += a1 * m.transition(i, k) * w[k];
      }
      // Propagate beta one step: r > 1 counts down inside the segment,
      // r = 1 leaves through a boundary transition.
      for (int j = 0; j < N; ++j) {
        double out = 0.0;
        for (int k = 0; k < N; ++k)
          if (k != j) out += m.transition(j, k) * w[k];
        beta_cur[j * L + 0] = out;
        double b_inv = m.emission(j, o[t + 1]) * inv;
        for (int r = 1; r < L; ++r)
          beta_cur[j * L + r] = b_inv * beta_next[j * L + r - 1];
      }
    }
    // Occupancy and emission statistics at t.
    double norm = 0.0;
    for (int j = 0; j < N; ++j) {
      double g = 0.0;
      for (int r = 0; r < L; ++r) g += a[j * L + r] * beta_cur[j * L + r];
      st.gamma(t, j) = g;
      norm += g;
    }
    double inv_norm = 1.0 / norm;
    for (int j = 0; j < N; ++j) {
      st.gamma(t, j) *= inv_norm;
      st.emit_num(j, o[t]) += st.gamma(t, j);
    }
    // Initial entries contribute to the duration statistics.
    if (t == 0) {
      for (int j = 0; j < N; ++j)
        for (int r = 0; r < L; ++r)
          st.dur_num(j, r) += a[j * L + r] * beta_cur[j * L + r];
    }
  }
}

void floor_and_normalize(std::span<double> row, double floor_value) {
  for (double& v : row)
    if (v < floor_value) v = floor_value;
  double sum = std::accumulate(row.begin(), row.end(), 0.0);
  for (double& v : row) v /= sum;
}

HsmmModel initial_model(int num_states, int num_symbols, int max_sojourn,
                        Rng& rng) {
  HsmmModel m;
  m.num_states = num_states;
  m.num_symbols = num_symbols;
  m.max_sojourn = max_sojourn;
  m.transition = Matrix(num_states, num_states);
  m.emission = Matrix(num_states, num_symbols);
  m.initial.assign(num_states, 1.0 / num_states);
  m.sojourn = Matrix(num_states, max_sojourn, 1.0 / max_sojourn);
  for (int i = 0; i < num_states; ++i) {
    if (num_states > 1) {
      for (int j = 0; j < num_states; ++j)
        m.transition(i, j) = (i == j) ? 0.0 : 1.0 / (num_states - 1);
    }
    double sum = 0.0;
    for (int k = 0; k < num_symbols; ++k) {
      m.emission(i, k) = rng.exponential();
      sum += m.emission(i, k);
    }
    for (int k = 0; k < num_symbols; ++k) m.emission(i, k) /= sum;
  }
  return m;
}

}  // namespace

void HsmmModel::validate() const {
  if (num_states < 1) throw DomainError("num_states must be >= 1");
  if (num_symbols < 1) throw DomainError("num_symbols must be >= 1");
  if (max_sojourn < 1) throw DomainError("max_sojourn must be >= 1");
  if (transition.rows() != static_cast<std::size_t>(num_states) ||
      transition.cols() != static_cast<std::size_t>(num_states))
    throw DomainError("transition matrix shape mismatch");
  if (emission.rows() != static_cast<std::size_t>(num_states) ||
      emission.cols() != static_cast<std::size_t>(num_symbols))
    throw DomainError("emission matrix shape mismatch");
  if (sojourn.rows() != static_cast<std::size_t>(num_states) ||
      sojourn.cols() != static_cast<std::size_t>(max_sojourn))
    throw DomainError("sojourn matrix shape mismatch");
  if (initial.size() != static_cast<std::size_t>(num_states))
    throw DomainError("initial vector length mismatch");

  for (int i = 0; i < num_states; ++i) {
    if (transition(i, i) != 0.0)
      throw DomainError("transition diagonal must be exactly zero");
    double row_sum = 0.0;
    for (int j = 0; j < num_states; ++j) {
      double v = transition(i, j);
      if (v < 0.0 || v > 1.0 || !std::isfinite(v))
        throw DomainError("transition entry outside [0,1]");
      row_sum += v;
    }
    if (num_states > 1 && std::abs(row_sum - 1.0) > 1e-12)
      throw DomainError("transition row " + std::to_string(i) +
                        " sums to " + std::to_string(row_sum));
    double d_sum = 0.0;
    for (int l = 0; l < max_sojourn; ++l) {
      double v = sojourn(i, l);
      if (v < 0.0 || !std::isfinite(v))
        throw DomainError("sojourn entry negative");
      d_sum += v;
    }
    if (std::abs(d_sum - 1.0) > 1e-10)
      throw DomainError("sojourn row " + std::to_string(i) + " sums to " +
                        std::to_string(d_sum));
    double b_sum = 0.0;
    for (int k = 0; k < num_symbols; ++k) {
      double v = emission(i, k);
      if (v < 0.0 || v > 1.0 || !std::isfinite(v))
        throw DomainError("emission entry outside [0,1]");
      b_sum += v;
    }
    if (std::abs(b_sum - 1.0) > 1e-12)
      throw DomainError("emission row " + std::to_string(i) + " sums to " +
                        std::to_string(b_sum));
  }
  double pi_sum = std::accumulate(initial.begin(), initial.end(), 0.0);
  if (std::abs(pi_sum - 1.0) > 1e-12)
    throw DomainError("initial distribution sums to " + std::to_string(pi_sum));
}

std::pair<HsmmModel, HsmmFitReport> fit_hsmm(const ObservationSequence& obs,
                                             int num_states, int max_sojourn,
                                             const FitConfig& config) {
  if (max_sojourn < 2) throw DomainError("max_sojourn must be >= 2");
  if (num_states < 1) throw DomainError("num_states must be >= 1");
  if (obs.size() < static_cast<std::size_t>(num_states) *
                       static_cast<std::size_t>(max_sojourn))
    throw DomainError("sequence shorter than num_states * max_sojourn");
  int max_symbol = *std::max_element(obs.symbols.begin(), obs.symbols.end());
  int min_symbol = *std::min_element(obs.symbols.begin(), obs.symbols.end());
  if (min_symbol < 0) throw DomainError("negative symbol index");
  const int num_symbols = std::max(2, max_symbol + 1);
  const auto t_start = std::chrono::steady_clock::now();
  auto budget_spent = [&]() {
    if (config.time_budget_seconds <= 0.0) return false;
    std::chrono::duration<double> d = std::chrono::steady_clock::now() - t_start;
    return d.count() > config.time_budget_seconds;
  };

  // Single state: no transitions to fit, emission is the empirical
  // frequency, and the likelihood does not depend on the sojourn law.
  if (num_states == 1) {
    HsmmModel m;
    m.num_states = 1;
    m.num_symbols = num_symbols;
    m.max_sojourn = max_sojourn;
    m.transition = Matrix(1, 1, 0.0);
    m.initial = {1.0};
    m.sojourn = Matrix(1, max_sojourn, 1.0 / max_sojourn);
    m.emission = Matrix(1, num_symbols);
    for (int s : obs.symbols) m.emission(0, s) += 1.0;
    for (int k = 0; k < num_symbols; ++k)
      m.emission(0, k) /= static_cast<double>(obs.size());
    HsmmFitReport report;
    double ll = 0.0;
    for (int s : obs.symbols)
      ll += m.emission(0, s) > 0 ? std::log(m.emission(0, s)) : 0.0;
    report.log_likelihood_trace = {ll};
    report.iterations = 1;
    report.converged = true;
    report.restarts_used = 1;
    report.short_sequence_warning = obs.size() < 20000;
    return {std::move(m), report};
  }

  Rng rng(config.seed);
  HsmmModel best_model;
  HsmmFitReport best_report;
  bool have_best = false;

  for (int rs = 0; rs < std::max(1, config.restarts); ++rs) {
    HsmmModel model = initial_model(num_states, num_symbols, max_sojourn, rng);
    HsmmFitReport report;
    ForwardPass fwd;
    SmoothStats st;
    double prev_ll = kNegInf;
    for (int iter = 0; iter < config.max_iterations; ++iter) {
      if (!scaled_forward(model, obs.symbols, fwd))
        throw NumericError("zero-probability observation during HSMM EM");
      report.log_likelihood_trace.push_back(fwd.log_likelihood);
      ++report.iterations;
      if (iter > 0 && std::abs(fwd.log_likelihood - prev_ll) < config.tolerance) {
        report.converged = true;
        break;
      }
      prev_ll = fwd.log_likelihood;
      if (budget_spent()) {
        report.budget_exhausted = true;
        break;
      }

      smooth(model, obs.symbols, fwd, st);

      for (int i = 0; i < num_states; ++i) {
        double row = 0.0;
        for (int k = 0; k < num_states; ++k) row += st.trans_num(i, k);
        if (row > 0.0)
          for (int k = 0; k < num_states; ++k)
            model.transition(i, k) = (k == i) ? 0.0 : st.trans_num(i, k) / row;
        // Floor off-diagonal entries, keep the diagonal at zero.
        double sum = 0.0;
        for (int k = 0; k < num_states; ++k) {
          if (k == i) continue;
          if (model.transition(i, k) < kProbFloor)
            model.transition(i, k) = kProbFloor;
          sum += model.transition(i, k);
        }
        for (int k = 0; k < num_states; ++k)
          if (k != i) model.transition(i, k) /= sum;

        floor_and_normalize(model.emission.row(i), kProbFloor);
      }
      // M-step for duration: expected segment counts by length.
      for (int i = 0; i < num_states; ++i) {
        double total = 0.0;
        for (int l = 0; l < max_sojourn; ++l) total += st.dur_num(i, l);
        if (total > 0.0)
          for (int l = 0; l < max_sojourn; ++l)
            model.sojourn(i, l) = st.dur_num(i, l) / total;
        floor_and_normalize(model.sojourn.row(i), kProbFloor);
      }
      for (int j = 0; j < num_states; ++j) model.initial[j] = st.gamma(0, j);
      floor_and_normalize(std::span<double>(model.initial), kProbFloor);
    }
    if (!have_best || report.log_likelihood_trace.back() >
                          best_report.log_likelihood_trace.back()) {
      best_model = std::move(model);
      best_report = std::move(report);
      have_best = true;
    }
    if (budget_spent()) break;
  }
  best_report.restarts_used = config.restarts;
  best_report.short_sequence_warning = obs.size() < 20000;
  return {std::move(best_model), std::move(best_report)};
}

Matrix hsmm_posterior(const HsmmModel& model, const ObservationSequence& obs) {
  model.validate();
  check_obs(model, obs);
  ForwardPass fwd;
  if (!scaled_forward(model, obs.symbols, fwd))
    throw NumericError("observation sequence has zero probability");
  SmoothStats st;
  smooth(model, obs.symbols, fwd, st);
  return std::move(st.gamma);
}

HsmmDecode decode_hsmm(const HsmmModel& model, const ObservationSequence& obs) {
  Matrix gamma = hsmm_posterior(model, obs);
  HsmmDecode out;
  const std::size_t T = gamma.rows();
  const int N = model.num_states;
  out.path.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    int arg = 0;
    for (int j = 1; j < N; ++j)
      if (gamma(t, j) > gamma(t, arg)) arg = j;
    out.path[t] = arg;
  }
  std::size_t run = 0;
  for (std::size_t t = 0; t < T; ++t) {
    run = (t > 0 && out.path[t] == out.path[t - 1]) ? run + 1 : 1;
    bool run_ends = (t + 1 == T) || out.path[t + 1] != out.path[t];
    if (run_ends && run > static_cast<std::size_t>(model.max_sojourn))
      ++out.runs_exceeding_max_sojourn;
  }
  return out;
}

double log_likelihood(const HsmmModel& model, const ObservationSequence& obs) {
  model.validate();
  check_obs(model, obs);
  ForwardPass fwd;
  if (!scaled_forward(model, obs.symbols, fwd)) return kNegInf;
  return fwd.log_likelihood;
}

Simulation simulate_hsmm(const HsmmModel& model, std::size_t length,
                         std::uint64_t seed) {
  model.validate();
  if (length < 1) throw DomainError("simulation length must be >= 1");
  Rng rng(seed);
  Simulation sim;
  sim.states.reserve(length);
  sim.observations.symbols.reserve(length);
  int state = rng.categorical(model.initial);
  while (sim.states.size() < length) {
    int sojourn = rng.categorical(model.sojourn.row(state)) + 1;
    for (int s = 0; s < sojourn && sim.states.size() < length; ++s) {
      sim.states.push_back(state);
      sim.observations.symbols.push_back(
          rng.categorical(model.emission.row(state)));
    }
    if (model.num_states > 1)
      state = rng.categorical(model.transition.row(state));
  }
  return sim;
}

}  // namespace flowpatch::hsmm
