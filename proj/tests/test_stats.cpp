#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "flowpatch/errors.hpp"
#include "flowpatch/stats.hpp"
#include "flowpatch/timeutil.hpp"
#include "oracles.hpp"

using namespace flowpatch;
using doctest::Approx;

namespace {

double ts(const char* iso) { return timeutil::parse_iso8601(iso); }

patches::Patch make_patch(const char* iso, patches::StateLabel label,
                          long long n_tot, double mof, double part) {
  patches::Patch p;
  p.member_id = "M";
  p.label = label;
  p.t_first = ts(iso);
  p.t_last = p.t_first;
  p.n_tot = n_tot;
  p.market_order_fraction = mof;
  p.participation_rate = part;
  return p;
}

// sample mean and (n-1)-normalized sd, for recomputing window stats
std::pair<double, double> mean_sd(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("hill refuses thin or broken tails") {
  const double e = std::exp(1.0);
  // five samples leave only two order statistics in the top 40%
  CHECK_THROWS_AS(stats::hill_estimator({1, 1, 1, e, e}, 0.4), DomainError);
  CHECK_THROWS_AS(stats::hill_estimator({}, 0.1), DomainError);
  CHECK_THROWS_AS(stats::hill_estimator({1, 2, 3}, 0.0), DomainError);
  CHECK_THROWS_AS(stats::hill_estimator({1, 2, 3}, 1.0), DomainError);
  CHECK_THROWS_AS(stats::hill_estimator({1, 2, 3}, 1.5), DomainError);
  CHECK_THROWS_AS(stats::hill_estimator({1.0, 2.0, 0.0}, 0.5), DomainError);
  CHECK_THROWS_AS(stats::hill_estimator({1.0, 2.0, -3.0}, 0.5), DomainError);
  // enough order statistics, but the tail carries no information
  CHECK_THROWS_AS(stats::hill_estimator(std::vector<double>(100, 1.0), 0.2),
                  NumericError);
}

TEST_CASE("hill hits hand-computed exponents exactly") {
  const double e = std::exp(1.0);

  // 20 samples at e over a floor of ones: every tail log-ratio is 1,
  // so the estimate is k / k = 1.
  std::vector<double> flat(80, 1.0);
  flat.insert(flat.end(), 20, e);
  const auto one = stats::hill_estimator(flat, 0.2);
  CHECK(one.k == 20);
  CHECK(one.exponent == Approx(1.0).epsilon(1e-12));
  CHECK(one.ci_low == Approx(1.0 - 1.96 / std::sqrt(20.0)).epsilon(1e-12));
  CHECK(one.ci_high == Approx(1.0 + 1.96 / std::sqrt(20.0)).epsilon(1e-12));

  // 5000 samples at e^(2/3): estimate 5000 / (5000 * 2/3) = 1.5.
  std::vector<double> big(95000, 1.0);
  big.insert(big.end(), 5000, std::exp(2.0 / 3.0));
  const auto est = stats::hill_estimator(big, 0.05);
  CHECK(est.k == 5000);
  CHECK(est.exponent == Approx(1.5).epsilon(1e-10));
  const double half = 1.96 * est.exponent / std::sqrt(5000.0);
  CHECK(est.ci_high - est.ci_low == Approx(2 * half).epsilon(1e-10));
  CHECK(est.quantile == 0.05);
}

TEST_CASE("hill is invariant under rescaling") {
  std::vector<double> base;
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i)
    base.push_back(std::pow(1.0 - u(gen), -1.0 / 1.7));
  auto scaled = base;
  for (double& v : scaled) v *= 8.0;  // power of two: exact in binary64
  const auto a = stats::hill_estimator(base, 0.1);
  const auto b = stats::hill_estimator(scaled, 0.1);
  CHECK(a.exponent == b.exponent);
  CHECK(a.k == b.k);
}

TEST_CASE("hill brackets the exponent of synthetic power-law draws") {
  std::mt19937_64 gen(424242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> draws;
  draws.reserve(20000);
  // survival P(X >= x) = x^{-1.5}
  for (int i = 0; i < 20000; ++i)
    draws.push_back(std::pow(1.0 - u(gen), -1.0 / 1.5));
  const auto est = stats::hill_estimator(draws, 0.05);
  CHECK(est.k == 1000);
  CHECK(est.ci_low < 1.5);
  CHECK(1.5 < est.ci_high);
}

TEST_CASE("ccdf starts at one and steps down at distinct values") {
  const auto pts = stats::empirical_ccdf({3, 1, 2, 2});
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].value == 1);
  CHECK(pts[0].prob == Approx(1.0));
  CHECK(pts[1].value == 2);
  CHECK(pts[1].prob == Approx(0.75));
  CHECK(pts[2].value == 3);
  CHECK(pts[2].prob == Approx(0.25));

  const auto dup = stats::empirical_ccdf({5, 3, 3, 9, 1, 5, 5});
  REQUIRE(dup.size() == 4);
  CHECK(dup[0].value == 1);
  CHECK(dup[0].prob == Approx(1.0));
  CHECK(dup[1].prob == Approx(6.0 / 7.0));
  CHECK(dup[2].value == 5);
  CHECK(dup[2].prob == Approx(4.0 / 7.0));
  CHECK(dup[3].prob == Approx(1.0 / 7.0));
  for (std::size_t i = 1; i < dup.size(); ++i) {
    CHECK(dup[i].value > dup[i - 1].value);
    CHECK(dup[i].prob < dup[i - 1].prob);
  }

  const auto flat = stats::empirical_ccdf(std::vector<double>(4, 2.5));
  REQUIRE(flat.size() == 1);
  CHECK(flat[0].prob == Approx(1.0));
  CHECK_THROWS_AS(stats::empirical_ccdf({}), DomainError);
}

TEST_CASE("conditional means with linear bins") {
  const std::vector<std::pair<double, double>> pairs = {
      {0, 10}, {1, 10}, {2, 20}, {3, 20}};
  const auto bins = stats::conditional_mean_binned(pairs,
                                                   stats::Binning::Linear, 2);
  REQUIRE(bins.size() == 2);
  CHECK(bins[0].bin_center == Approx(0.75));
  CHECK(bins[0].mean == Approx(10.0));
  CHECK(bins[0].standard_error == Approx(0.0));
  CHECK(bins[0].count == 2);
  CHECK(bins[1].bin_center == Approx(2.25));  // x == hi joins the last bin
  CHECK(bins[1].mean == Approx(20.0));
  CHECK(bins[1].count == 2);

  // singleton bins report zero standard error
  const auto single = stats::conditional_mean_binned(
      {{0, 5}, {3, 7}}, stats::Binning::Linear, 2);
  REQUIRE(single.size() == 2);
  CHECK(single[0].count == 1);
  CHECK(single[0].standard_error == 0.0);
}

TEST_CASE("conditional mean standard error matches the sample formula") {
  // one bin holding y = 1..4: sd^2 = 5/3, se = sqrt(5/12)
  const auto bins = stats::conditional_mean_binned(
      {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, stats::Binning::Linear, 1);
  REQUIRE(bins.size() == 1);
  CHECK(bins[0].count == 4);
  CHECK(bins[0].mean == Approx(2.5));
  CHECK(bins[0].standard_error == Approx(std::sqrt(5.0 / 12.0)));
  CHECK(bins[0].bin_center == Approx(1.5));  // midpoint of [0, 3]
}

TEST_CASE("conditional means with log bins") {
  const auto bins = stats::conditional_mean_binned(
      {{1, 1}, {10, 2}, {100, 3}}, stats::Binning::Log, 3);
  REQUIRE(bins.size() == 3);
  // centers are geometric: 100^(1/6), 100^(1/2), 100^(5/6)
  CHECK(bins[0].bin_center == Approx(std::pow(100.0, 1.0 / 6.0)));
  CHECK(bins[1].bin_center == Approx(10.0));
  CHECK(bins[2].bin_center == Approx(std::pow(100.0, 5.0 / 6.0)));
  CHECK(bins[0].mean == Approx(1.0));
  CHECK(bins[1].mean == Approx(2.0));
  CHECK(bins[2].mean == Approx(3.0));

  CHECK_THROWS_AS(
      stats::conditional_mean_binned({{0.0, 1.0}, {2.0, 1.0}},
                                     stats::Binning::Log, 2),
      DomainError);
  CHECK_THROWS_AS(
      stats::conditional_mean_binned({{-1.0, 1.0}, {2.0, 1.0}},
                                     stats::Binning::Log, 2),
      DomainError);
}

TEST_CASE("conditional means skip non-finite responses") {
  const double nan = std::nan("");
  const auto bins = stats::conditional_mean_binned(
      {{0, 1}, {1, nan}, {2, 3}}, stats::Binning::Linear, 1);
  REQUIRE(bins.size() == 1);
  CHECK(bins[0].count == 2);
  CHECK(bins[0].mean == Approx(2.0));

  CHECK_THROWS_AS(
      stats::conditional_mean_binned({{0, nan}}, stats::Binning::Linear, 1),
      DomainError);
  CHECK_THROWS_AS(
      stats::conditional_mean_binned({{0, 1.0}}, stats::Binning::Linear, 0),
      DomainError);

  // all x equal: everything lands in one bin centered on that x
  const auto flat = stats::conditional_mean_binned(
      {{5, 1}, {5, 3}}, stats::Binning::Linear, 3);
  REQUIRE(flat.size() == 1);
  CHECK(flat[0].bin_center == Approx(5.0));
  CHECK(flat[0].count == 2);
  CHECK(flat[0].mean == Approx(2.0));
}

TEST_CASE("log-size test accepts hand-built symmetric logs") {
  // logs are {-1 x5, 0 x20, +1 x5}: zero skew, kurtosis exactly 3
  std::vector<double> samples(5, std::exp(-1.0));
  samples.insert(samples.end(), 20, 1.0);
  samples.insert(samples.end(), 5, std::exp(1.0));
  const auto r = stats::jarque_bera_lognormal(samples);
  CHECK(r.statistic < 1e-20);
  CHECK(r.p_value == Approx(1.0));
  CHECK_FALSE(r.reject_at_0_01);

  // degenerate spread: statistic defined as zero
  const auto flat = stats::jarque_bera_lognormal(std::vector<double>(30, 2.5));
  CHECK(flat.statistic == 0.0);
  CHECK(flat.p_value == 1.0);
  CHECK_FALSE(flat.reject_at_0_01);
}

TEST_CASE("log-size test guards its inputs") {
  CHECK_THROWS_AS(stats::jarque_bera_lognormal(std::vector<double>(29, 2.0)),
                  DomainError);
  std::vector<double> with_zero(30, 2.0);
  with_zero[7] = 0.0;
  CHECK_THROWS_AS(stats::jarque_bera_lognormal(with_zero), DomainError);
  with_zero[7] = -1.0;
  CHECK_THROWS_AS(stats::jarque_bera_lognormal(with_zero), DomainError);
}

TEST_CASE("log-size test is scale invariant") {
  std::mt19937_64 gen(2718);
  std::normal_distribution<double> normal(0.5, 0.9);
  std::vector<double> samples;
  for (int i = 0; i < 400; ++i) samples.push_back(std::exp(normal(gen)));
  const auto a = stats::jarque_bera_lognormal(samples);
  for (double& v : samples) v *= 1000.0;
  const auto b = stats::jarque_bera_lognormal(samples);
  CHECK(a.statistic == Approx(b.statistic).epsilon(1e-6));
  CHECK(a.reject_at_0_01 == b.reject_at_0_01);
}

TEST_CASE("log-size test separates lognormal from power-law samples") {
  std::mt19937_64 gen(12345);
  std::normal_distribution<double> normal(2.0, 0.7);
  std::vector<double> lognormal;
  for (int i = 0; i < 600; ++i) lognormal.push_back(std::exp(normal(gen)));
  const auto ok = stats::jarque_bera_lognormal(lognormal);
  CHECK_FALSE(ok.reject_at_0_01);

  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> pareto;
  for (int i = 0; i < 2000; ++i)
    pareto.push_back(std::pow(1.0 - u(gen), -1.0 / 1.5));
  const auto bad = stats::jarque_bera_lognormal(pareto);
  CHECK(bad.reject_at_0_01);
  CHECK(bad.statistic > 100.0);
}

TEST_CASE("incomplete beta identities") {
  for (double x : {0.1, 0.37, 0.5, 0.9}) {
    CHECK(stats::incomplete_beta(1, 1, x) == Approx(x).epsilon(1e-12));
    CHECK(stats::incomplete_beta(2, 1, x) == Approx(x * x).epsilon(1e-12));
    CHECK(stats::incomplete_beta(1, 2, x) ==
          Approx(2 * x - x * x).epsilon(1e-12));
  }
  // symmetry point
  CHECK(stats::incomplete_beta(0.5, 0.5, 0.5) == Approx(0.5).epsilon(1e-12));
  CHECK(stats::incomplete_beta(3.7, 3.7, 0.5) == Approx(0.5).epsilon(1e-12));
  // complement
  const double lhs = stats::incomplete_beta(2.5, 1.7, 0.3);
  const double rhs = stats::incomplete_beta(1.7, 2.5, 0.7);
  CHECK(lhs + rhs == Approx(1.0).epsilon(1e-12));
  // range clamps and guards
  CHECK(stats::incomplete_beta(2, 3, 0.0) == 0.0);
  CHECK(stats::incomplete_beta(2, 3, -0.5) == 0.0);
  CHECK(stats::incomplete_beta(2, 3, 1.0) == 1.0);
  CHECK(stats::incomplete_beta(2, 3, 1.5) == 1.0);
  CHECK_THROWS_AS(stats::incomplete_beta(0.0, 1.0, 0.5), DomainError);
  CHECK_THROWS_AS(stats::incomplete_beta(1.0, -2.0, 0.5), DomainError);
}

TEST_CASE("student t tail probabilities") {
  CHECK(stats::student_t_two_sided_p(0.0, 7.0) == Approx(1.0));
  CHECK(stats::student_t_two_sided_p(
            std::numeric_limits<double>::infinity(), 4.0) == 0.0);
  // Cauchy: P(|T| > 1) = 1/2
  CHECK(stats::student_t_two_sided_p(1.0, 1.0) == Approx(0.5).epsilon(1e-12));
  // classic two-sided 5% critical value for 10 degrees of freedom
  CHECK(stats::student_t_two_sided_p(2.2281388519649385, 10.0) ==
        Approx(0.05).epsilon(1e-9));
  // symmetric in t
  CHECK(stats::student_t_two_sided_p(-1.7, 6.0) ==
        Approx(stats::student_t_two_sided_p(1.7, 6.0)).epsilon(1e-14));
  CHECK_THROWS_AS(stats::student_t_two_sided_p(1.0, 0.0), DomainError);
}

TEST_CASE("regression recovers an exact line") {
  const std::vector<double> x = {0, 1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(2 * v + 1);
  const auto s = stats::linear_regression(x, y);
  CHECK(s.slope == Approx(2.0).epsilon(1e-12));
  CHECK(s.intercept == Approx(1.0).epsilon(1e-12));
  CHECK(s.pearson_r == Approx(1.0));
  CHECK(s.p_value == 0.0);
  CHECK_FALSE(s.degenerate);
  CHECK(s.n == 6);

  for (double& v : y) v = -v;
  const auto neg = stats::linear_regression(x, y);
  CHECK(neg.slope == Approx(-2.0).epsilon(1e-12));
  CHECK(neg.pearson_r == Approx(-1.0));
  CHECK(neg.p_value == 0.0);
}

TEST_CASE("regression matches externally computed statistics") {
  // reference values cross-checked with an independent statistics package
  const std::vector<double> x = {1, 2, 3, 4, 5, 6};
  const std::vector<double> y = {2, 1, 4, 3, 6, 5};
  const auto s = stats::linear_regression(x, y);
  CHECK(s.slope == Approx(29.0 / 35.0).epsilon(1e-12));
  CHECK(s.intercept == Approx(0.6).epsilon(1e-9));
  CHECK(s.pearson_r == Approx(29.0 / 35.0).epsilon(1e-12));
  CHECK(s.pearson_r == Approx(oracle::pearson(x, y)).epsilon(1e-12));
  CHECK(s.p_value == Approx(0.0415626822157434).epsilon(1e-9));
  CHECK_FALSE(s.degenerate);
}

TEST_CASE("regression flags degenerate inputs") {
  const auto flat_x = stats::linear_regression({2, 2, 2}, {1, 5, 9});
  CHECK(flat_x.degenerate);
  CHECK(std::isnan(flat_x.slope));
  CHECK(std::isnan(flat_x.pearson_r));
  CHECK(std::isnan(flat_x.p_value));

  const auto flat_y = stats::linear_regression({1, 2, 3}, {4, 4, 4});
  CHECK(flat_y.degenerate);
  CHECK(flat_y.slope == 0.0);
  CHECK(flat_y.intercept == Approx(4.0));
  CHECK(std::isnan(flat_y.pearson_r));

  // two points fit a perfect line but leave no residual degrees of freedom
  const auto two = stats::linear_regression({0, 1}, {3, 5});
  CHECK(two.slope == Approx(2.0));
  CHECK(two.pearson_r == Approx(1.0));
  CHECK(std::isnan(two.p_value));
  CHECK_FALSE(two.degenerate);

  CHECK_THROWS_AS(stats::linear_regression({1, 2}, {1}), DomainError);
  CHECK_THROWS_AS(stats::linear_regression({1}, {1}), DomainError);
}

TEST_CASE("trend windows: month bookkeeping, exclusions, and deltas") {
  using patches::StateLabel;
  const std::vector<stats::DailyPrice> prices = {
      {ts("2004-01-05T12:00:00"), 100.0},
      {ts("2004-01-06T12:00:00"), 110.0},  // lone January return: excluded
      {ts("2004-02-02T12:00:00"), 100.0},
      {ts("2004-02-03T12:00:00"), 105.0},
      {ts("2004-02-04T12:00:00"), 95.0},
      {ts("2004-03-01T12:00:00"), 95.0},  // March returns all zero: excluded
      {ts("2004-03-02T12:00:00"), 95.0},
      {ts("2004-03-03T12:00:00"), 95.0},
      {ts("2004-04-01T12:00:00"), 100.0},
      {ts("2004-04-02T12:00:00"), 102.0},
      {ts("2004-04-05T12:00:00"), 104.0},
      {ts("2004-06-01T12:00:00"), 100.0},
      {ts("2004-06-02T12:00:00"), 101.0},
      {ts("2004-06-03T12:00:00"), 103.0},
  };

  const double nan = std::nan("");
  std::vector<patches::Patch> pts;
  // January patch: its month has no usable window, so it must vanish.
  pts.push_back(make_patch("2004-01-05T10:00:00", StateLabel::Buy, 30, 0.5, 0.5));
  // February: three buy patches (one NaN fraction, one NaN participation),
  // one sell, one neutral, one below the length cut.
  pts.push_back(make_patch("2004-02-10T10:00:00", StateLabel::Buy, 12, 0.5, 0.25));
  pts.push_back(make_patch("2004-02-11T10:00:00", StateLabel::Buy, 14, nan, 0.75));
  pts.push_back(make_patch("2004-02-12T10:00:00", StateLabel::Buy, 20, 0.7, nan));
  pts.push_back(make_patch("2004-02-13T10:00:00", StateLabel::Sell, 10, 0.25, 0.25));
  pts.push_back(make_patch("2004-02-16T10:00:00", StateLabel::Neutral, 50, 0.5, 0.5));
  pts.push_back(make_patch("2004-02-17T10:00:00", StateLabel::Buy, 5, 0.5, 0.5));
  // April: one buy, two sells.
  pts.push_back(make_patch("2004-04-15T10:00:00", StateLabel::Buy, 20, 0.3, 0.5));
  pts.push_back(make_patch("2004-04-16T10:00:00", StateLabel::Sell, 16, 0.6, 0.125));
  pts.push_back(make_patch("2004-04-19T10:00:00", StateLabel::Sell, 24, 0.8, 0.375));
  // June: one per side; the sell fraction is NaN on its only patch.
  pts.push_back(make_patch("2004-06-15T10:00:00", StateLabel::Buy, 12, 0.4, 0.5));
  pts.push_back(make_patch("2004-06-16T10:00:00", StateLabel::Sell, 11, nan, 0.25));

  const auto res = stats::asymmetry_by_trend(pts, prices);
  CHECK(res.excluded_windows == 2);
  REQUIRE(res.windows.size() == 3);
  CHECK(res.windows[0].month == "2004-02");
  CHECK(res.windows[1].month == "2004-04");
  CHECK(res.windows[2].month == "2004-06");

  // trend ratio recomputed from the same close-to-close definition
  const std::vector<double> feb_rets = {std::log(100.0 / 110.0),
                                        std::log(105.0 / 100.0),
                                        std::log(95.0 / 105.0)};
  const auto [feb_mean, feb_sd] = mean_sd(feb_rets);
  CHECK(res.windows[0].mean_daily_return == Approx(feb_mean).epsilon(1e-12));
  CHECK(res.windows[0].volatility == Approx(feb_sd).epsilon(1e-12));
  CHECK(res.windows[0].x == Approx(feb_mean / feb_sd).epsilon(1e-12));
  const std::vector<double> apr_rets = {std::log(100.0 / 95.0),
                                        std::log(102.0 / 100.0),
                                        std::log(104.0 / 102.0)};
  const auto [apr_mean, apr_sd] = mean_sd(apr_rets);
  CHECK(res.windows[1].x == Approx(apr_mean / apr_sd).epsilon(1e-12));

  const auto& feb = res.windows[0];
  CHECK(feb.buy.patch_count == 3);  // January/neutral/short ones are invisible
  CHECK(feb.sell.patch_count == 1);
  CHECK(feb.buy.mean_length == Approx(46.0 / 3.0));
  CHECK(feb.buy.mean_market_order_fraction == Approx(0.6));  // NaN skipped
  CHECK(feb.buy.mean_participation == Approx(0.5));          // NaN skipped
  CHECK(feb.sell.mean_length == Approx(10.0));

  const auto& apr = res.windows[1];
  CHECK(apr.buy.patch_count == 1);
  CHECK(apr.sell.patch_count == 2);
  CHECK(apr.sell.mean_length == Approx(20.0));
  CHECK(apr.sell.mean_market_order_fraction == Approx(0.7));
  CHECK(apr.sell.mean_participation == Approx(0.25));

  const auto& jun = res.windows[2];
  CHECK(jun.buy.patch_count == 1);
  CHECK(jun.sell.patch_count == 1);
  CHECK(std::isnan(jun.sell.mean_market_order_fraction));

  // count deltas use every window
  CHECK(res.delta_count.n == 3);
  CHECK(std::isfinite(res.delta_count.slope));
  // the NaN June fraction delta drops that window from one regression only
  CHECK(res.delta_market_order_fraction.n == 2);
  CHECK(std::isnan(res.delta_market_order_fraction.p_value));  // two points
  CHECK(res.delta_mean_length.n == 3);
  // participation deltas are 1/4 in every month: constant response
  CHECK(res.delta_participation.n == 3);
  CHECK(res.delta_participation.degenerate);
  CHECK(res.delta_participation.slope == 0.0);
}

TEST_CASE("trend windows: guards") {
  const std::vector<stats::DailyPrice> two = {
      {ts("2004-01-05T12:00:00"), 100.0}, {ts("2004-01-06T12:00:00"), 101.0}};
  CHECK_THROWS_AS(stats::asymmetry_by_trend({}, two), DomainError);

  const std::vector<stats::DailyPrice> bad_price = {
      {ts("2004-01-05T12:00:00"), 100.0},
      {ts("2004-01-06T12:00:00"), 0.0},
      {ts("2004-01-07T12:00:00"), 101.0}};
  CHECK_THROWS_AS(stats::asymmetry_by_trend({}, bad_price), DomainError);

  // three equal prices: the only window has zero volatility
  const std::vector<stats::DailyPrice> flat = {
      {ts("2004-01-05T12:00:00"), 100.0},
      {ts("2004-01-06T12:00:00"), 100.0},
      {ts("2004-01-07T12:00:00"), 100.0}};
  CHECK_THROWS_AS(stats::asymmetry_by_trend({}, flat), DomainError);
}

TEST_CASE("trend windows: planted monotone asymmetries point the right way") {
  using patches::StateLabel;
  // Four months with two returns each: a_m +- b, so x_m = a_m / (b*sqrt(2)).
  const double b = 0.01;
  const std::array<double, 4> a = {-0.02, -0.01, 0.01, 0.02};

  std::vector<stats::DailyPrice> prices;
  double price = 100.0;
  prices.push_back({ts("2004-12-20T12:00:00"), price});
  for (int m = 0; m < 4; ++m) {
    char day10[32], day20[32];
    std::snprintf(day10, sizeof(day10), "2005-%02d-10T12:00:00", m + 1);
    std::snprintf(day20, sizeof(day20), "2005-%02d-20T12:00:00", m + 1);
    price *= std::exp(a[static_cast<std::size_t>(m)] + b);
    prices.push_back({ts(day10), price});
    price *= std::exp(a[static_cast<std::size_t>(m)] - b);
    prices.push_back({ts(day20), price});
  }

  std::vector<patches::Patch> pts;
  for (int m = 1; m <= 4; ++m) {
    char day15[32];
    std::snprintf(day15, sizeof(day15), "2005-%02d-15T10:00:00", m);
    const long long buy_n = 2 + m, sell_n = 6 - m;
    const double buy_len = 10.0 + 2 * m, sell_len = 18.0 - 2 * m;
    const double buy_mof = 0.6 - 0.1 * m, sell_mof = 0.2 + 0.1 * m;
    const double buy_part = 0.1 + 0.05 * m, sell_part = 0.3 - 0.05 * m;
    for (long long i = 0; i < buy_n; ++i)
      pts.push_back(make_patch(day15, StateLabel::Buy,
                               static_cast<long long>(buy_len), buy_mof,
                               buy_part));
    for (long long i = 0; i < sell_n; ++i)
      pts.push_back(make_patch(day15, StateLabel::Sell,
                               static_cast<long long>(sell_len), sell_mof,
                               sell_part));
  }

  const auto res = stats::asymmetry_by_trend(pts, prices);
  CHECK(res.excluded_windows == 0);
  REQUIRE(res.windows.size() == 4);
  for (std::size_t i = 1; i < 4; ++i)
    CHECK(res.windows[i].x > res.windows[i - 1].x);

  // rising trend: more and longer buy patches, fewer aggressive buys,
  // higher buy participation
  CHECK(res.delta_count.slope > 0.0);
  CHECK(res.delta_mean_length.slope > 0.0);
  CHECK(res.delta_market_order_fraction.slope < 0.0);
  CHECK(res.delta_participation.slope > 0.0);
  CHECK(res.delta_count.pearson_r > 0.9);
  CHECK(res.delta_market_order_fraction.pearson_r < -0.9);
}

}  // TEST_SUITE
