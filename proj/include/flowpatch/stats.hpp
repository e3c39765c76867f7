#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "flowpatch/errors.hpp"
#include "flowpatch/patches.hpp"

namespace flowpatch::stats {

// Hill tail-index fit over the top-q order statistics.
struct HillEstimate {
  double exponent = 0.0;
  std::size_t k = 0;      // order statistics used
  double quantile = 0.0;  // requested tail fraction
  double ci_low = 0.0;    // 95% interval: exponent * (1 +- 1.96/sqrt(k))
  double ci_high = 0.0;
};

// pre: all samples > 0, floor(q*n) >= 20 and < n.
HillEstimate hill_estimator(std::vector<double> samples, double quantile);

struct CcdfPoint {
  double value = 0.0;
  double prob = 0.0;  // P(X >= value)
};

// CCDF at each distinct sample value, ascending in value, starting at 1.
std::vector<CcdfPoint> empirical_ccdf(std::vector<double> samples);

enum class Binning { Linear, Log };

struct BinnedMean {
  double bin_center = 0.0;
  double mean = 0.0;
  double standard_error = 0.0;  // sd / sqrt(count); 0 for singleton bins
  std::size_t count = 0;
};

// Mean of y conditional on binned x; empty bins omitted, non-finite y
// pairs ignored. Log binning requires positive x.
std::vector<BinnedMean> conditional_mean_binned(
    const std::vector<std::pair<double, double>>& pairs, Binning binning,
    std::size_t num_bins);

struct JarqueBeraResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject_at_0_01 = false;
};

// Jarque-Bera normality test applied to the natural logs of the samples
// (i.e. a lognormality test); chi-square(2) asymptotic p-value.
JarqueBeraResult jarque_bera_lognormal(const std::vector<double>& samples);

// One close price per trading day, time-ordered.
struct DailyPrice {
  double day = 0.0;  // any epoch instant inside the session date
  double close = 0.0;
};

struct LabelAggregate {
  long long patch_count = 0;
  double mean_length = 0.0;                 // mean n_tot
  double mean_market_order_fraction = 0.0;  // NaN patches skipped
  double mean_participation = 0.0;
};

// One calendar month: trend ratio x = <r>/sigma plus per-label patch
// aggregates for the buy-minus-sell deltas.
struct TrendWindow {
  std::string month;  // "YYYY-MM"
  double mean_daily_return = 0.0;
  double volatility = 0.0;
  double x = 0.0;
  LabelAggregate buy;
  LabelAggregate sell;
  bool valid = false;  // >= 2 daily returns and sigma > 0
};

struct RegressionSummary {
  double slope = 0.0;
  double intercept = 0.0;
  double pearson_r = 0.0;
  double p_value = 1.0;  // two-sided, from the t distribution
  std::size_t n = 0;
  bool degenerate = false;  // constant regressor or response
};

struct AsymmetryResult {
  std::vector<TrendWindow> windows;   // valid windows only, by month
  std::size_t excluded_windows = 0;   // sigma = 0 or < 2 daily returns
  RegressionSummary delta_count;
  RegressionSummary delta_mean_length;
  RegressionSummary delta_market_order_fraction;
  RegressionSummary delta_participation;
};

// Regress the four buy-minus-sell deltas on the monthly trend ratio x.
// Directional patches with n_tot >= n_min enter; a patch belongs to the
// month of its first transaction. Needs >= 2 valid windows.
AsymmetryResult asymmetry_by_trend(const std::vector<patches::Patch>& all_patches,
                                   const std::vector<DailyPrice>& daily_prices,
                                   long long n_min = 10);

// Least squares + Pearson correlation of y on x with two-sided p-values;
// exposed for reuse and direct testing.
RegressionSummary linear_regression(const std::vector<double>& x,
                                    const std::vector<double>& y);

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Student-t two-sided tail probability with nu degrees of freedom.
double student_t_two_sided_p(double t, double nu);

}  // namespace flowpatch::stats
