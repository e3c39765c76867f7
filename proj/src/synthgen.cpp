#include "flowpatch/synthgen.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "flowpatch/errors.hpp"
#include "flowpatch/numfmt.hpp"
#include "flowpatch/timeutil.hpp"

namespace flowpatch::synthgen {

void PatchGenConfig::validate() const {
  if (num_patches < 1) throw DomainError("num_patches must be >= 1");
  if (pareto_exponent <= 1.0)
    throw DomainError("pareto_exponent must exceed 1");
  if (min_length < 1) throw DomainError("min_length must be >= 1");
  if (bias <= 0.5 || bias > 1.0)
    throw DomainError("bias must lie in (0.5, 1]");
}

int pareto_length_from_uniform(const PatchGenConfig& config, double u) {
  // X = x_min * U^(-1/(mu-1)), then ceiling.
  double x = config.min_length * std::pow(u, -1.0 / (config.pareto_exponent - 1.0));
  double c = std::ceil(x);
  if (c > 2147483647.0) c = 2147483647.0;
  int len = static_cast<int>(c);
  return len < config.min_length ? config.min_length : len;
}

int sample_pareto_length(const PatchGenConfig& config, Rng& rng) {
  config.validate();
  return pareto_length_from_uniform(config, rng.uniform_open());
}

GeneratedSeries generate_patched_series(const PatchGenConfig& config) {
  config.validate();
  Rng rng(config.seed);
  GeneratedSeries out;
  out.ground_truth.reserve(config.num_patches);

  int sign = +1;
  for (int p = 0; p < config.num_patches; ++p) {
    int length = pareto_length_from_uniform(config, rng.uniform_open());
    out.ground_truth.push_back(PatchTruth{p, sign, length});
    const int dominant_symbol = sign > 0 ? 1 : 0;
    for (int i = 0; i < length; ++i) {
      bool dominant = rng.uniform() < config.bias;
      out.observations.symbols.push_back(dominant ? dominant_symbol
                                                  : 1 - dominant_symbol);
    }
    if (config.alternate_signs) sign = -sign;
  }
  return out;
}

void TapeFixtureConfig::validate() const {
  if (session_open_seconds < 0 ||
      session_close_seconds <= session_open_seconds ||
      session_close_seconds > 86400.0)
    throw ConfigError("fixture sessions must satisfy 0 <= open < close <= 24h");
  if (trade_interval_seconds <= 0)
    throw ConfigError("fixture trade interval must be positive");
  if (session_close_seconds - session_open_seconds < trade_interval_seconds)
    throw ConfigError("fixture session too short for one trade");
  if (base_price <= 0 || tick <= 0 || base_price <= 2 * tick)
    throw ConfigError("fixture needs base_price > 2*tick > 0");
  if (min_shares < 1 || max_shares < min_shares)
    throw ConfigError("fixture needs 1 <= min_shares <= max_shares");
  if (initiator_probability < 0 || initiator_probability > 1 ||
      noise_fraction < 0 || noise_fraction > 1)
    throw ConfigError("fixture probabilities must lie in [0, 1]");
}

namespace {

std::string minutes_hhmm(double seconds_past_midnight) {
  const int total = static_cast<int>(seconds_past_midnight / 60.0 + 0.5);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d:%02d", total / 60, total % 60);
  return buf;
}

}  // namespace

void emit_tape_fixture(const GeneratedSeries& series,
                       const TapeFixtureConfig& config,
                       const std::string& transactions_csv_path,
                       const std::string& calendar_json_path) {
  config.validate();
  if (series.observations.symbols.empty())
    throw DomainError("cannot emit an empty series");

  std::ofstream csv(transactions_csv_path);
  if (!csv) throw ConfigError("cannot write " + transactions_csv_path);
  csv << (config.with_quotes ? "timestamp,member_id,sign,shares,price,bid,ask"
                             : "timestamp,member_id,sign,shares,price")
      << '\n';

  Rng rng(config.seed);
  const double day0 = timeutil::epoch_seconds(
      timeutil::parse_date(config.start_date));
  const double session_len =
      config.session_close_seconds - config.session_open_seconds;
  const long long per_day = static_cast<long long>(
      std::floor(session_len / config.trade_interval_seconds));

  double mid = config.base_price;
  long long days_used = 0;

  auto write_row = [&](double t, const std::string& member, int sign,
                       double price) {
    const long long shares =
        config.min_shares +
        static_cast<long long>(rng.uniform() * static_cast<double>(
                                                   config.max_shares -
                                                   config.min_shares + 1));
    csv << timeutil::format_iso8601(t) << ',' << member << ',' << sign << ','
        << shares << ',' << format_double(price);
    if (config.with_quotes)
      csv << ',' << format_double(mid - config.tick) << ','
          << format_double(mid + config.tick);
    csv << '\n';
  };

  // Fixed draw order per slot keeps the file reproducible: walk, initiator,
  // shares, then the optional noise trade's sign, initiator, and shares.
  for (std::size_t i = 0; i < series.observations.symbols.size(); ++i) {
    const long long slot = static_cast<long long>(i);
    const long long day = slot / per_day;
    days_used = day + 1;
    const double t = day0 + static_cast<double>(day) * 86400.0 +
                     config.session_open_seconds +
                     static_cast<double>(slot % per_day) *
                         config.trade_interval_seconds;

    const double step = rng.uniform();
    if (step < 0.25) mid += config.tick;
    else if (step < 0.5) mid = std::max(2 * config.tick, mid - config.tick);

    const int sign = series.observations.symbols[i] == 1 ? +1 : -1;
    const bool member_initiates = rng.uniform() < config.initiator_probability;
    const bool at_ask = (sign > 0) == member_initiates;
    write_row(t, config.member_id, sign,
              at_ask ? mid + config.tick : mid - config.tick);

    if (rng.uniform() < config.noise_fraction) {
      const int noise_sign = rng.uniform() < 0.5 ? +1 : -1;
      const bool noise_initiates =
          rng.uniform() < config.initiator_probability;
      const bool noise_at_ask = (noise_sign > 0) == noise_initiates;
      write_row(t + 0.5 * config.trade_interval_seconds,
                config.noise_member_id, noise_sign,
                noise_at_ask ? mid + config.tick : mid - config.tick);
    }
  }

  std::ofstream cal(calendar_json_path);
  if (!cal) throw ConfigError("cannot write " + calendar_json_path);
  const std::string open_text = minutes_hhmm(config.session_open_seconds);
  const std::string close_text = minutes_hhmm(config.session_close_seconds);
  cal << "[\n";
  for (long long d = 0; d < days_used; ++d) {
    const timeutil::CivilDate date =
        timeutil::date_of(day0 + static_cast<double>(d) * 86400.0);
    char datebuf[16];
    std::snprintf(datebuf, sizeof(datebuf), "%04d-%02d-%02d", date.year,
                  date.month, date.day);
    cal << "  {\"date\": \"" << datebuf << "\", \"open\": \"" << open_text
        << "\", \"close\": \"" << close_text << "\"}"
        << (d + 1 < days_used ? "," : "") << '\n';
  }
  cal << "]\n";
}

}  // namespace flowpatch::synthgen
