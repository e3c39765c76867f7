#include "flowpatch/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include "flowpatch/timeutil.hpp"

namespace flowpatch::stats {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  const double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 3e-14) break;
  }
  return h;
}

double sample_sd(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double y : v) ss += (y - mean) * (y - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double y : v) s += y;
  return v.empty() ? kNaN : s / static_cast<double>(v.size());
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw DomainError("incomplete_beta: a and b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  // front is symmetric under (a,b,x) -> (b,a,1-x), so it serves both branches.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double nu) {
  if (!(nu > 0.0)) throw DomainError("student_t_two_sided_p: nu must be > 0");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(0.5 * nu, 0.5, nu / (nu + t * t));
}

HillEstimate hill_estimator(std::vector<double> samples, double quantile) {
  if (samples.empty()) throw DomainError("hill_estimator: no samples");
  if (!(quantile > 0.0) || !(quantile < 1.0))
    throw DomainError("hill_estimator: quantile must lie in (0,1)");
  for (double v : samples)
    if (!(v > 0.0)) throw DomainError("hill_estimator: samples must be > 0");

  const std::size_t n = samples.size();
  const std::size_t k =
      static_cast<std::size_t>(std::floor(quantile * static_cast<double>(n)));
  if (k < 20)
    throw DomainError("hill_estimator: only " + std::to_string(k) +
                      " tail samples; need at least 20");
  if (k >= n)
    throw DomainError("hill_estimator: tail covers every sample");

  std::sort(samples.begin(), samples.end(), std::greater<double>());
  const double threshold = samples[k];  // x_(k+1)
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    sum += std::log(samples[i] / threshold);
  if (!(sum > 0.0))
    throw NumericError("hill_estimator: degenerate tail (all order "
                       "statistics equal the threshold)");

  HillEstimate est;
  est.exponent = static_cast<double>(k) / sum;
  est.k = k;
  est.quantile = quantile;
  const double half = 1.96 * est.exponent / std::sqrt(static_cast<double>(k));
  est.ci_low = est.exponent - half;
  est.ci_high = est.exponent + half;
  return est;
}

std::vector<CcdfPoint> empirical_ccdf(std::vector<double> samples) {
  if (samples.empty()) throw DomainError("empirical_ccdf: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  std::vector<CcdfPoint> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i > 0 && samples[i] == samples[i - 1]) continue;
    out.push_back({samples[i], (n - static_cast<double>(i)) / n});
  }
  return out;
}

std::vector<BinnedMean> conditional_mean_binned(
    const std::vector<std::pair<double, double>>& pairs, Binning binning,
    std::size_t num_bins) {
  if (num_bins == 0)
    throw DomainError("conditional_mean_binned: need at least one bin");
  std::vector<std::pair<double, double>> data;
  data.reserve(pairs.size());
  for (const auto& p : pairs)
    if (std::isfinite(p.second)) data.push_back(p);
  if (data.empty())
    throw DomainError("conditional_mean_binned: no finite pairs");
  if (binning == Binning::Log)
    for (const auto& p : data)
      if (!(p.first > 0.0))
        throw DomainError("conditional_mean_binned: log bins need x > 0");

  double lo = data.front().first, hi = lo;
  for (const auto& p : data) {
    lo = std::min(lo, p.first);
    hi = std::max(hi, p.first);
  }

  struct Acc {
    std::size_t count = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  std::vector<Acc> bins(num_bins);

  const bool log_bins = binning == Binning::Log;
  const double a = log_bins ? std::log(lo) : lo;
  const double b = log_bins ? std::log(hi) : hi;
  const double width = (b - a) / static_cast<double>(num_bins);

  for (const auto& [x, y] : data) {
    std::size_t idx = 0;
    if (width > 0.0) {
      const double u = log_bins ? std::log(x) : x;
      idx = static_cast<std::size_t>((u - a) / width);
      if (idx >= num_bins) idx = num_bins - 1;  // x == hi lands here
    }
    bins[idx].count += 1;
    bins[idx].sum += y;
    bins[idx].sum_sq += y * y;
  }

  std::vector<BinnedMean> out;
  for (std::size_t i = 0; i < num_bins; ++i) {
    const Acc& acc = bins[i];
    if (acc.count == 0) continue;
    BinnedMean bm;
    const double cnt = static_cast<double>(acc.count);
    const double center_u = a + (static_cast<double>(i) + 0.5) * width;
    bm.bin_center = width > 0.0 ? (log_bins ? std::exp(center_u) : center_u)
                                : (log_bins ? lo : lo);
    bm.mean = acc.sum / cnt;
    if (acc.count > 1) {
      double var = (acc.sum_sq - cnt * bm.mean * bm.mean) / (cnt - 1.0);
      if (var < 0.0) var = 0.0;  // fp cancellation
      bm.standard_error = std::sqrt(var / cnt);
    }
    bm.count = acc.count;
    out.push_back(bm);
  }
  return out;
}

JarqueBeraResult jarque_bera_lognormal(const std::vector<double>& samples) {
  if (samples.size() < 30)
    throw DomainError("jarque_bera_lognormal: need at least 30 samples");
  std::vector<double> logs;
  logs.reserve(samples.size());
  for (double v : samples) {
    if (!(v > 0.0))
      throw DomainError("jarque_bera_lognormal: samples must be > 0");
    logs.push_back(std::log(v));
  }
  const double n = static_cast<double>(logs.size());
  const double mean = mean_of(logs);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : logs) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;

  // With every log identical the accumulated mean still differs from the
  // samples by rounding noise, which would turn 0/0 into a junk statistic;
  // treat an exactly constant input as a zero statistic instead.
  const auto [lo_it, hi_it] = std::minmax_element(logs.begin(), logs.end());
  JarqueBeraResult r;
  if (m2 > 0.0 && *lo_it < *hi_it) {
    const double skew = m3 / std::pow(m2, 1.5);
    const double kurt = m4 / (m2 * m2);
    r.statistic =
        n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
  }
  // chi-square(2) survival function collapses to a bare exponential
  r.p_value = std::exp(-0.5 * r.statistic);
  r.reject_at_0_01 = r.p_value < 0.01;
  return r;
}

RegressionSummary linear_regression(const std::vector<double>& x,
                                    const std::vector<double>& y) {
  if (x.size() != y.size())
    throw DomainError("linear_regression: size mismatch");
  if (x.size() < 2)
    throw DomainError("linear_regression: need at least 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }

  RegressionSummary s;
  s.n = x.size();
  if (sxx == 0.0) {
    // constant regressor: slope undefined
    s.slope = s.intercept = s.pearson_r = s.p_value = kNaN;
    s.degenerate = true;
    return s;
  }
  s.slope = sxy / sxx;
  s.intercept = my - s.slope * mx;
  if (syy == 0.0) {
    s.pearson_r = kNaN;  // constant response
    s.p_value = kNaN;
    s.degenerate = true;
    return s;
  }
  double r = sxy / std::sqrt(sxx * syy);
  r = std::clamp(r, -1.0, 1.0);
  s.pearson_r = r;
  if (x.size() > 2) {
    if (std::fabs(r) == 1.0) {
      s.p_value = 0.0;
    } else {
      const double nu = n - 2.0;
      const double t = r * std::sqrt(nu / (1.0 - r * r));
      s.p_value = student_t_two_sided_p(t, nu);
    }
  } else {
    s.p_value = kNaN;  // no residual degrees of freedom
  }
  return s;
}

AsymmetryResult asymmetry_by_trend(const std::vector<patches::Patch>& all_patches,
                                   const std::vector<DailyPrice>& daily_prices,
                                   long long n_min) {
  if (daily_prices.size() < 3)
    throw DomainError("asymmetry_by_trend: need at least 3 daily prices");
  std::vector<DailyPrice> prices = daily_prices;
  std::sort(prices.begin(), prices.end(),
            [](const DailyPrice& a, const DailyPrice& b) {
              return a.day < b.day;
            });
  for (const auto& p : prices)
    if (!(p.close > 0.0))
      throw DomainError("asymmetry_by_trend: prices must be positive");

  // Close-to-close log returns, credited to the month of the later day.
  std::map<std::string, std::vector<double>> returns_by_month;
  for (std::size_t i = 1; i < prices.size(); ++i)
    returns_by_month[timeutil::month_key(prices[i].day)].push_back(
        std::log(prices[i].close / prices[i - 1].close));

  struct PatchAcc {
    long long count = 0;
    double length_sum = 0.0;
    double mof_sum = 0.0;
    long long mof_count = 0;
    double part_sum = 0.0;
    long long part_count = 0;
  };
  std::map<std::string, std::array<PatchAcc, 2>> patch_by_month;  // buy, sell
  for (const auto& p : all_patches) {
    if (p.n_tot < n_min) continue;
    int slot;
    if (p.label == patches::StateLabel::Buy) slot = 0;
    else if (p.label == patches::StateLabel::Sell) slot = 1;
    else continue;
    PatchAcc& acc = patch_by_month[timeutil::month_key(p.t_first)]
                        [static_cast<std::size_t>(slot)];
    acc.count += 1;
    acc.length_sum += static_cast<double>(p.n_tot);
    if (std::isfinite(p.market_order_fraction)) {
      acc.mof_sum += p.market_order_fraction;
      acc.mof_count += 1;
    }
    if (std::isfinite(p.participation_rate)) {
      acc.part_sum += p.participation_rate;
      acc.part_count += 1;
    }
  }

  auto fill_aggregate = [](const PatchAcc& acc) {
    LabelAggregate agg;
    agg.patch_count = acc.count;
    agg.mean_length =
        acc.count > 0 ? acc.length_sum / static_cast<double>(acc.count) : kNaN;
    agg.mean_market_order_fraction =
        acc.mof_count > 0 ? acc.mof_sum / static_cast<double>(acc.mof_count)
                          : kNaN;
    agg.mean_participation =
        acc.part_count > 0 ? acc.part_sum / static_cast<double>(acc.part_count)
                           : kNaN;
    return agg;
  };

  AsymmetryResult result;
  for (const auto& [month, rets] : returns_by_month) {
    if (rets.size() < 2) {
      ++result.excluded_windows;
      continue;
    }
    const double mean = mean_of(rets);
    const double sd = sample_sd(rets, mean);
    if (!(sd > 0.0)) {
      ++result.excluded_windows;
      continue;
    }
    TrendWindow w;
    w.month = month;
    w.mean_daily_return = mean;
    w.volatility = sd;
    w.x = mean / sd;
    w.valid = true;
    auto it = patch_by_month.find(month);
    if (it != patch_by_month.end()) {
      w.buy = fill_aggregate(it->second[0]);
      w.sell = fill_aggregate(it->second[1]);
    } else {
      w.buy = fill_aggregate(PatchAcc{});
      w.sell = fill_aggregate(PatchAcc{});
    }
    result.windows.push_back(std::move(w));
  }
  if (result.windows.size() < 2)
    throw DomainError("asymmetry_by_trend: fewer than 2 usable windows");

  // Count deltas exist for every window; mean-based deltas only where both
  // sides have data.
  std::vector<double> xs, d_count;
  for (const auto& w : result.windows) {
    xs.push_back(w.x);
    d_count.push_back(static_cast<double>(w.buy.patch_count) -
                      static_cast<double>(w.sell.patch_count));
  }
  result.delta_count = linear_regression(xs, d_count);

  auto regress_delta = [&](auto member) {
    std::vector<double> rx, ry;
    for (const auto& w : result.windows) {
      const double delta = w.buy.*member - w.sell.*member;
      if (!std::isfinite(delta)) continue;
      rx.push_back(w.x);
      ry.push_back(delta);
    }
    RegressionSummary s;
    if (rx.size() < 2) {
      s.n = rx.size();
      s.slope = s.intercept = s.pearson_r = s.p_value = kNaN;
      s.degenerate = true;
      return s;
    }
    return linear_regression(rx, ry);
  };
  result.delta_mean_length = regress_delta(&LabelAggregate::mean_length);
  result.delta_market_order_fraction =
      regress_delta(&LabelAggregate::mean_market_order_fraction);
  result.delta_participation =
      regress_delta(&LabelAggregate::mean_participation);
  return result;
}

}  // namespace flowpatch::stats
