#include "flowpatch/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "flowpatch/compare.hpp"
#include "flowpatch/hmm.hpp"
#include "flowpatch/hsmm.hpp"
#include "flowpatch/model_io.hpp"
#include "flowpatch/numfmt.hpp"
#include "flowpatch/patches.hpp"
#include "flowpatch/stats.hpp"
#include "flowpatch/timeutil.hpp"
#include "flowpatch/trades.hpp"

namespace flowpatch::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string hex16(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

// File-system safe slug for member ids used in output names.
std::string sanitize(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-') ? c : '_';
  return out;
}

void atomic_write(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    if (!out.flush())
      throw ConfigError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

struct MeanSd {
  std::size_t count = 0;
  double mean = kNaN;
  double sd = kNaN;
};

MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd r;
  r.count = v.size();
  if (v.empty()) return r;
  double s = 0.0;
  for (double x : v) s += x;
  r.mean = s / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return r;
}

double nan_skipping_mean(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v)
    if (std::isfinite(x)) {
      s += x;
      ++n;
    }
  return n > 0 ? s / static_cast<double>(n) : kNaN;
}

const std::array<patches::StateLabel, 3> kLabels = {
    patches::StateLabel::Buy, patches::StateLabel::Neutral,
    patches::StateLabel::Sell};

}  // namespace

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const NumericError*>(&e)) return 4;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const DomainError*>(&e)) return 3;
  return 4;
}

void RunConfig::validate() const {
  if (transactions_csv.empty() || !fs::exists(transactions_csv))
    throw ConfigError("transactions_csv does not exist: '" + transactions_csv +
                      "'");
  if (calendar_json.empty() || !fs::exists(calendar_json))
    throw ConfigError("calendar_json does not exist: '" + calendar_json + "'");
  if (!segments_csv.empty() && !fs::exists(segments_csv))
    throw ConfigError("segments_csv does not exist: '" + segments_csv + "'");
  if (min_transactions < 1 || min_active_days < 1)
    throw ConfigError("activity filter thresholds must be >= 1");
  if (num_states != 3)
    throw ConfigError("the buy/neutral/sell labeling needs num_states = 3");
  if (restarts < 1) throw ConfigError("restarts must be >= 1");
  if (!(tolerance > 0)) throw ConfigError("tolerance must be positive");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (use_hsmm && max_sojourn < 2)
    throw ConfigError("max_sojourn must be >= 2 when use_hsmm is set");
  if (n_min < 0) throw ConfigError("n_min must be >= 0");
  if (!(hill_quantile > 0) || !(hill_quantile < 1))
    throw ConfigError("hill_quantile must lie in (0, 1)");
  if (num_bins < 1) throw ConfigError("num_bins must be >= 1");
  if (output_dir.empty()) throw ConfigError("output_dir must be set");
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  static const std::set<std::string> known = {
      "transactions_csv", "calendar_json",  "segments_csv",
      "min_transactions", "min_active_days", "num_states",
      "restarts",         "tolerance",      "max_iterations",
      "use_hsmm",         "max_sojourn",    "single_period",
      "n_min",            "hill_quantile",  "num_bins",
      "deduplicate_both_sides",             "seed",
      "output_dir"};
  for (const auto& item : j.items())
    if (!known.count(item.key()))
      throw ConfigError("unknown config key: '" + item.key() + "'");

  RunConfig c;
  try {
    c.transactions_csv = j.value("transactions_csv", c.transactions_csv);
    c.calendar_json = j.value("calendar_json", c.calendar_json);
    c.segments_csv = j.value("segments_csv", c.segments_csv);
    c.min_transactions = j.value("min_transactions", c.min_transactions);
    c.min_active_days = j.value("min_active_days", c.min_active_days);
    c.num_states = j.value("num_states", c.num_states);
    c.restarts = j.value("restarts", c.restarts);
    c.tolerance = j.value("tolerance", c.tolerance);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.use_hsmm = j.value("use_hsmm", c.use_hsmm);
    c.max_sojourn = j.value("max_sojourn", c.max_sojourn);
    c.single_period = j.value("single_period", c.single_period);
    c.n_min = j.value("n_min", c.n_min);
    c.hill_quantile = j.value("hill_quantile", c.hill_quantile);
    c.num_bins = j.value("num_bins", c.num_bins);
    c.deduplicate_both_sides =
        j.value("deduplicate_both_sides", c.deduplicate_both_sides);
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
  } catch (const json::type_error& e) {
    throw ConfigError(std::string("config JSON types: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string RunConfig::to_json() const {
  json j;
  j["transactions_csv"] = transactions_csv;
  j["calendar_json"] = calendar_json;
  j["segments_csv"] = segments_csv;
  j["min_transactions"] = min_transactions;
  j["min_active_days"] = min_active_days;
  j["num_states"] = num_states;
  j["restarts"] = restarts;
  j["tolerance"] = tolerance;
  j["max_iterations"] = max_iterations;
  j["use_hsmm"] = use_hsmm;
  j["max_sojourn"] = max_sojourn;
  j["single_period"] = single_period;
  j["n_min"] = n_min;
  j["hill_quantile"] = hill_quantile;
  j["num_bins"] = num_bins;
  j["deduplicate_both_sides"] = deduplicate_both_sides;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  return j.dump(2) + "\n";
}

namespace {

// One fitted member-period with everything downstream stages need.
struct FitRecord {
  std::string member;
  std::string period;
  std::size_t observations = 0;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  int restarts_used = 0;
  std::string flag;  // "degenerate", "short_sequence", "budget", or ""
};

std::vector<double> collect(const std::vector<patches::Patch>& ps,
                            double (*get)(const patches::Patch&)) {
  std::vector<double> v;
  v.reserve(ps.size());
  for (const auto& p : ps) v.push_back(get(p));
  return v;
}

void append_summary_rows(std::ostringstream& out, const char* filter_name,
                         const std::vector<patches::Patch>& ps) {
  for (auto label : kLabels) {
    std::vector<patches::Patch> sub;
    for (const auto& p : ps)
      if (p.label == label) sub.push_back(p);
    const auto lengths = collect(
        sub, [](const patches::Patch& p) { return double(p.n_tot); });
    const MeanSd len = mean_sd(lengths);
    out << filter_name << ',' << patches::to_string(label) << ','
        << sub.size() << ',' << format_double(len.mean) << ','
        << format_double(len.sd) << ','
        << format_double(nan_skipping_mean(collect(
               sub,
               [](const patches::Patch& p) { return p.duration_seconds; })))
        << ','
        << format_double(nan_skipping_mean(
               collect(sub, [](const patches::Patch& p) { return p.v_tot; })))
        << ','
        << format_double(nan_skipping_mean(collect(
               sub,
               [](const patches::Patch& p) { return p.buy_volume_ratio; })))
        << ','
        << format_double(nan_skipping_mean(collect(
               sub,
               [](const patches::Patch& p) { return p.market_order_fraction; })))
        << ','
        << format_double(nan_skipping_mean(collect(
               sub,
               [](const patches::Patch& p) { return p.participation_rate; })))
        << '\n';
  }
}

}  // namespace

RunOutcome run_pipeline(const RunConfig& config) {
  try {
    config.validate();
  } catch (const std::exception& e) {
    return {exit_code_for(e), "", e.what()};
  }

  const std::string config_echo = config.to_json();
  const fs::path run_dir =
      fs::path(config.output_dir) / ("run-" + hex16(fnv1a(config_echo)));
  json manifest;
  manifest["version"] = kVersion;
  manifest["seed"] = config.seed;
  manifest["config"] = json::parse(config_echo);
  json notes = json::array();

  try {
    fs::create_directories(run_dir);
    fs::remove(run_dir / "FAILED");

    // ---- ingest ----------------------------------------------------------
    trades::LoadOptions load_opts;
    load_opts.deduplicate_both_sides = config.deduplicate_both_sides;
    trades::LoadResult loaded =
        trades::load_transactions_csv(config.transactions_csv, load_opts);
    trades::MarketTape tape(
        std::move(loaded.transactions),
        trades::TradingCalendar::from_json_file(config.calendar_json));

    json counts;
    counts["rows_read"] = loaded.rows_read;
    counts["row_errors"] = loaded.errors.size();
    counts["reorder_count"] = loaded.reorder_count;
    counts["deduplicated"] = loaded.deduplicated;

    // ---- member-period selection ----------------------------------------
    const auto member_ids = tape.member_ids();
    counts["members_total"] = member_ids.size();

    struct Slice {
      std::string member;
      std::string period;
      std::vector<trades::Transaction> txs;
      std::size_t offset = 0;  // position within the member's full sequence
    };
    std::vector<Slice> slices;
    std::size_t periods_considered = 0;
    for (const auto& member : member_ids) {
      const auto idxs = tape.member_indices(member);
      // group by fitting period, preserving time order
      std::map<std::string, Slice> by_period;
      std::map<std::string, std::size_t> first_pos;
      for (std::size_t pos = 0; pos < idxs.size(); ++pos) {
        const auto& tx = tape.transactions()[idxs[pos]];
        const std::string period =
            config.single_period
                ? std::string("all")
                : std::to_string(timeutil::year_of(tx.timestamp));
        auto [it, inserted] = by_period.emplace(period, Slice{});
        if (inserted) {
          it->second.member = member;
          it->second.period = period;
          it->second.offset = pos;
        }
        it->second.txs.push_back(tx);
      }
      for (auto& [period, slice] : by_period) {
        ++periods_considered;
        std::set<std::int64_t> active_days;
        for (const auto& tx : slice.txs)
          active_days.insert(timeutil::day_of(tx.timestamp));
        if (static_cast<long long>(slice.txs.size()) <
                config.min_transactions ||
            static_cast<long long>(active_days.size()) <
                config.min_active_days)
          continue;
        slices.push_back(std::move(slice));
      }
    }
    counts["member_periods_considered"] = periods_considered;
    counts["member_periods_fit"] = slices.size();

    if (slices.empty()) {
      notes.push_back("no members passed filter");
      manifest["counts"] = counts;
      manifest["notes"] = notes;
      atomic_write(run_dir / "manifest.json", manifest.dump(2) + "\n");
      return {3, run_dir.string(), "no members passed filter"};
    }

    // ---- fit, decode, label, extract per member-period -------------------
    std::vector<FitRecord> fit_records;
    std::vector<patches::Patch> all_patches;
    for (const auto& slice : slices) {
      const hmm::ObservationSequence seq = patches::signs_to_symbols(slice.txs);
      const std::uint64_t task_seed =
          config.seed ^ fnv1a(slice.member + "|" + slice.period);
      FitRecord rec;
      rec.member = slice.member;
      rec.period = slice.period;
      rec.observations = seq.size();

      hmm::StatePath path;
      patches::StateLabeling labeling;
      std::string model_json;
      if (config.use_hsmm) {
        hsmm::FitConfig fc;
        fc.max_iterations = config.max_iterations;
        fc.tolerance = config.tolerance;
        fc.restarts = config.restarts;
        fc.seed = task_seed;
        auto [model, report] =
            hsmm::fit_hsmm(seq, config.num_states, config.max_sojourn, fc);
        path = hsmm::decode_hsmm(model, seq).path;
        labeling = patches::label_states_from_emission(model.emission);
        model_json = hsmm_to_json(model);
        rec.log_likelihood = report.log_likelihood_trace.empty()
                                 ? -std::numeric_limits<double>::infinity()
                                 : report.log_likelihood_trace.back();
        rec.iterations = report.iterations;
        rec.converged = report.converged;
        rec.restarts_used = report.restarts_used;
        if (report.budget_exhausted) rec.flag = "budget";
        else if (report.short_sequence_warning) rec.flag = "short_sequence";
      } else {
        hmm::FitConfig fc;
        fc.max_iterations = config.max_iterations;
        fc.tolerance = config.tolerance;
        fc.restarts = config.restarts;
        fc.seed = task_seed;
        hmm::FitReport report =
            hmm::fit_baum_welch(seq, config.num_states, fc);
        path = hmm::posterior_decode(report.fitted_model, seq).path;
        labeling = patches::label_states(report.fitted_model);
        model_json = hmm_to_json(report.fitted_model);
        rec.log_likelihood = report.log_likelihood_trace.empty()
                                 ? -std::numeric_limits<double>::infinity()
                                 : report.log_likelihood_trace.back();
        rec.iterations = report.iterations;
        rec.converged = report.converged;
        rec.restarts_used = report.restarts_used;
        if (report.degenerate) rec.flag = "degenerate";
      }
      fit_records.push_back(rec);

      const std::string stem =
          sanitize(slice.member) + "_" + sanitize(slice.period);
      atomic_write(run_dir / ("model_" + stem + ".json"), model_json);

      std::ostringstream decode_csv;
      decode_csv << "index,symbol,state\n";
      for (std::size_t i = 0; i < path.size(); ++i)
        decode_csv << (slice.offset + i) << ',' << seq.symbols[i] << ','
                   << path[i] << '\n';
      atomic_write(run_dir / ("decode_" + stem + ".csv"), decode_csv.str());

      auto ps = patches::extract_patches(path, labeling, slice.txs, tape,
                                         slice.offset);
      all_patches.insert(all_patches.end(), ps.begin(), ps.end());
    }

    // ---- fit report -------------------------------------------------------
    {
      std::ostringstream out;
      out << "member,period,family,observations,log_likelihood,iterations,"
             "converged,restarts_used,flag\n";
      for (const auto& r : fit_records)
        out << r.member << ',' << r.period << ','
            << (config.use_hsmm ? "hsmm" : "hmm") << ',' << r.observations
            << ',' << format_double(r.log_likelihood) << ',' << r.iterations
            << ',' << (r.converged ? 1 : 0) << ',' << r.restarts_used << ','
            << r.flag << '\n';
      atomic_write(run_dir / "fits.csv", out.str());
    }

    // ---- patches ----------------------------------------------------------
    const auto filtered = patches::filter_min_length(all_patches, config.n_min);
    counts["patches_total"] = all_patches.size();
    counts["patches_filtered"] = filtered.size();
    {
      std::ostringstream out;
      patches::write_patch_csv(out, all_patches);
      atomic_write(run_dir / "patches.csv", out.str());
    }
    {
      std::ostringstream out;
      patches::write_patch_csv(out, filtered);
      atomic_write(run_dir / "patches_filtered.csv", out.str());
    }

    // ---- summary table ----------------------------------------------------
    {
      std::ostringstream out;
      out << "filter,label,patch_count,mean_length,sd_length,"
             "mean_duration_seconds,mean_v_tot,mean_buy_volume_ratio,"
             "mean_market_order_fraction,mean_participation_rate\n";
      append_summary_rows(out, "none", all_patches);
      append_summary_rows(out, "nmin", filtered);
      atomic_write(run_dir / "summary.csv", out.str());
    }

    // ---- tail exponents ---------------------------------------------------
    {
      struct Var {
        const char* name;
        double (*get)(const patches::Patch&);
      };
      const Var vars[] = {
          {"duration_seconds",
           [](const patches::Patch& p) { return p.duration_seconds; }},
          {"n_tot", [](const patches::Patch& p) { return double(p.n_tot); }},
          {"v_tot", [](const patches::Patch& p) { return p.v_tot; }},
      };
      std::ostringstream out;
      out << "label,variable,n,k,exponent,ci_low,ci_high,status\n";
      for (auto label : kLabels) {
        for (const auto& var : vars) {
          std::vector<double> v;
          for (const auto& p : filtered)
            if (p.label == label && var.get(p) > 0) v.push_back(var.get(p));
          out << patches::to_string(label) << ',' << var.name << ','
              << v.size() << ',';
          try {
            const auto est = stats::hill_estimator(v, config.hill_quantile);
            out << est.k << ',' << format_double(est.exponent) << ','
                << format_double(est.ci_low) << ','
                << format_double(est.ci_high) << ",ok\n";
          } catch (const Error&) {
            out << "0,nan,nan,nan,insufficient\n";
          }
        }
      }
      atomic_write(run_dir / "hill.csv", out.str());
    }

    // ---- figure data: CCDFs and binned conditionals -----------------------
    {
      std::ostringstream out;
      out << "label,variable,value,prob\n";
      for (auto label : kLabels) {
        struct Var {
          const char* name;
          double (*get)(const patches::Patch&);
        };
        const Var vars[] = {
            {"duration_seconds",
             [](const patches::Patch& p) { return p.duration_seconds; }},
            {"n_tot", [](const patches::Patch& p) { return double(p.n_tot); }},
            {"v_tot", [](const patches::Patch& p) { return p.v_tot; }},
        };
        for (const auto& var : vars) {
          std::vector<double> v;
          for (const auto& p : filtered)
            if (p.label == label) v.push_back(var.get(p));
          if (v.empty()) continue;
          for (const auto& pt : stats::empirical_ccdf(std::move(v)))
            out << patches::to_string(label) << ',' << var.name << ','
                << format_double(pt.value) << ',' << format_double(pt.prob)
                << '\n';
        }
      }
      atomic_write(run_dir / "figure_ccdf.csv", out.str());
    }
    {
      struct Metric {
        const char* name;
        double (*get)(const patches::Patch&);
      };
      const Metric metrics[] = {
          {"buy_volume_ratio",
           [](const patches::Patch& p) { return p.buy_volume_ratio; }},
          {"market_order_fraction",
           [](const patches::Patch& p) { return p.market_order_fraction; }},
          {"participation_rate",
           [](const patches::Patch& p) { return p.participation_rate; }},
      };
      std::ostringstream out;
      out << "metric,label,bin_center,mean,standard_error,count\n";
      for (const auto& metric : metrics) {
        for (auto label : kLabels) {
          std::vector<std::pair<double, double>> pairs;
          for (const auto& p : filtered)
            if (p.label == label)
              pairs.emplace_back(double(p.n_tot), metric.get(p));
          if (pairs.empty()) continue;
          bool any_finite = false;
          for (const auto& pr : pairs)
            if (std::isfinite(pr.second)) any_finite = true;
          if (!any_finite) continue;
          for (const auto& bm : stats::conditional_mean_binned(
                   pairs, stats::Binning::Log, config.num_bins))
            out << metric.name << ',' << patches::to_string(label) << ','
                << format_double(bm.bin_center) << ','
                << format_double(bm.mean) << ','
                << format_double(bm.standard_error) << ',' << bm.count
                << '\n';
        }
      }
      atomic_write(run_dir / "figure_conditional.csv", out.str());
    }

    // ---- trend-conditioned asymmetry --------------------------------------
    {
      // daily close = last tape print of each civil day
      std::map<std::int64_t, stats::DailyPrice> closes;
      for (const auto& tx : tape.transactions())
        closes[timeutil::day_of(tx.timestamp)] = {tx.timestamp, tx.price};
      std::vector<stats::DailyPrice> daily;
      daily.reserve(closes.size());
      for (const auto& [day, dp] : closes) daily.push_back(dp);

      try {
        const auto asym =
            stats::asymmetry_by_trend(all_patches, daily, config.n_min);
        counts["windows_valid"] = asym.windows.size();
        counts["windows_excluded"] = asym.excluded_windows;

        std::ostringstream wout;
        wout << "month,x,mean_daily_return,volatility,"
                "buy_count,buy_mean_length,buy_mean_market_order_fraction,"
                "buy_mean_participation,sell_count,sell_mean_length,"
                "sell_mean_market_order_fraction,sell_mean_participation\n";
        for (const auto& w : asym.windows)
          wout << w.month << ',' << format_double(w.x) << ','
               << format_double(w.mean_daily_return) << ','
               << format_double(w.volatility) << ',' << w.buy.patch_count
               << ',' << format_double(w.buy.mean_length) << ','
               << format_double(w.buy.mean_market_order_fraction) << ','
               << format_double(w.buy.mean_participation) << ','
               << w.sell.patch_count << ','
               << format_double(w.sell.mean_length) << ','
               << format_double(w.sell.mean_market_order_fraction) << ','
               << format_double(w.sell.mean_participation) << '\n';
        atomic_write(run_dir / "trend_windows.csv", wout.str());

        std::ostringstream rout;
        rout << "delta,slope,intercept,pearson_r,p_value,n,degenerate\n";
        const std::pair<const char*, const stats::RegressionSummary*> rows[] =
            {{"count", &asym.delta_count},
             {"mean_length", &asym.delta_mean_length},
             {"market_order_fraction", &asym.delta_market_order_fraction},
             {"participation", &asym.delta_participation}};
        for (const auto& [name, s] : rows)
          rout << name << ',' << format_double(s->slope) << ','
               << format_double(s->intercept) << ','
               << format_double(s->pearson_r) << ','
               << format_double(s->p_value) << ',' << s->n << ','
               << (s->degenerate ? 1 : 0) << '\n';
        atomic_write(run_dir / "asymmetry.csv", rout.str());
      } catch (const Error& e) {
        notes.push_back(std::string("asymmetry skipped: ") + e.what());
      }
    }

    // ---- external segmentation cross-tab ----------------------------------
    if (!config.segments_csv.empty()) {
      auto segments = compare::load_segments_csv(config.segments_csv);
      counts["segments"] = segments.size();
      compare::CrossTabOptions opts;
      opts.num_bins = config.num_bins;
      const auto rows =
          compare::cross_tabulate(all_patches, std::move(segments), opts);
      std::ostringstream out;
      compare::write_cross_tab_csv(out, rows);
      atomic_write(run_dir / "crosstab.csv", out.str());
    }

    manifest["counts"] = counts;
    manifest["notes"] = notes;
    atomic_write(run_dir / "manifest.json", manifest.dump(2) + "\n");
    return {0, run_dir.string(),
            "ok: " + std::to_string(slices.size()) + " member-period fits, " +
                std::to_string(all_patches.size()) + " patches"};
  } catch (const std::exception& e) {
    manifest["notes"] = notes;
    manifest["failed"] = e.what();
    std::error_code ignored;
    fs::create_directories(run_dir, ignored);
    try {
      atomic_write(run_dir / "FAILED", std::string(e.what()) + "\n");
      atomic_write(run_dir / "manifest.json", manifest.dump(2) + "\n");
    } catch (...) {
      // the marker is best-effort; the exit code carries the failure
    }
    return {exit_code_for(e), run_dir.string(), e.what()};
  }
}

}  // namespace flowpatch::pipeline
