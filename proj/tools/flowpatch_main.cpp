// flowpatch: fit hidden-state models to transaction sign series, cut the
// decoded paths into buy/neutral/sell patches, and characterize them.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowpatch/compare.hpp"
#include "flowpatch/hmm.hpp"
#include "flowpatch/hsmm.hpp"
#include "flowpatch/model_io.hpp"
#include "flowpatch/numfmt.hpp"
#include "flowpatch/patches.hpp"
#include "flowpatch/pipeline.hpp"
#include "flowpatch/stats.hpp"
#include "flowpatch/synthgen.hpp"
#include "flowpatch/timeutil.hpp"
#include "flowpatch/trades.hpp"

namespace {

using namespace flowpatch;

// Symbol series file: one integer per line, '#' starts a comment.
hmm::ObservationSequence read_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open series file: " + path);
  hmm::ObservationSequence seq;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    int v;
    if (ss >> v) {
      if (v < 0)
        throw DataError("series line " + std::to_string(line_no) +
                        ": symbols must be >= 0");
      seq.symbols.push_back(v);
    }
  }
  if (seq.symbols.empty()) throw DataError("series file is empty: " + path);
  return seq;
}

void write_series(const std::string& path, const hmm::ObservationSequence& seq) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write series file: " + path);
  for (int s : seq.symbols) out << s << '\n';
}

bool model_file_is_hsmm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("model file " + path + ": " + e.what());
  }
  return j.contains("sojourn");
}

std::vector<stats::DailyPrice> read_prices_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open prices file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("prices file is empty");
  std::vector<stats::DailyPrice> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError("prices line " + std::to_string(line_no) +
                      ": expected date,close");
    stats::DailyPrice dp;
    dp.day = timeutil::epoch_seconds(timeutil::parse_date(line.substr(0, comma)));
    try {
      dp.close = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw DataError("prices line " + std::to_string(line_no) +
                      ": bad close price");
    }
    out.push_back(dp);
  }
  return out;
}

std::vector<trades::Transaction> member_transactions(
    const trades::MarketTape& tape, const std::string& member) {
  std::vector<trades::Transaction> txs;
  for (std::size_t i : tape.member_indices(member))
    txs.push_back(tape.transactions()[i]);
  if (txs.empty())
    throw DataError("member '" + member + "' has no transactions");
  return txs;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create directory " + dir);
}

int run(int argc, char** argv) {
  CLI::App app{
      "flowpatch: hidden-state patch detection in transaction sign series"};
  app.require_subcommand(1);

  // ---- simulate ----------------------------------------------------------
  auto* sim = app.add_subcommand(
      "simulate", "Generate a labeled synthetic sign series");
  synthgen::PatchGenConfig gen;
  std::string sim_series, sim_truth, sim_tape, sim_calendar;
  synthgen::TapeFixtureConfig fixture;
  bool sim_no_alternate = false, sim_no_quotes = false;
  sim->add_option("--patches", gen.num_patches, "number of patches")
      ->required();
  sim->add_option("--mu", gen.pareto_exponent, "Pareto length exponent");
  sim->add_option("--min-length", gen.min_length, "minimum patch length");
  sim->add_option("--bias", gen.bias, "dominant-sign probability");
  sim->add_option("--seed", gen.seed, "generator seed");
  sim->add_flag("--no-alternate", sim_no_alternate,
                "keep the same dominant sign for every patch");
  sim->add_option("--series", sim_series, "write the symbol series here")
      ->required();
  sim->add_option("--truth", sim_truth,
                  "write the ground-truth patch table here");
  sim->add_option("--tape", sim_tape,
                  "also dress the series as a transactions CSV");
  sim->add_option("--calendar", sim_calendar,
                  "calendar JSON to write alongside --tape");
  sim->add_option("--member-id", fixture.member_id, "fixture member id");
  sim->add_option("--start-date", fixture.start_date, "fixture first day");
  sim->add_option("--interval", fixture.trade_interval_seconds,
                  "seconds between fixture trades");
  sim->add_option("--base-price", fixture.base_price, "fixture start price");
  sim->add_option("--noise-fraction", fixture.noise_fraction,
                  "chance of an interleaved noise trade");
  sim->add_option("--fixture-seed", fixture.seed, "fixture dressing seed");
  sim->add_flag("--no-quotes", sim_no_quotes, "omit bid/ask columns");

  // ---- fit ---------------------------------------------------------------
  auto* fit = app.add_subcommand("fit", "Fit a model to a symbol series");
  std::string fit_series, fit_model_out;
  int fit_states = 3, fit_restarts = 10, fit_max_iter = 500;
  int fit_max_sojourn = 50;
  double fit_tol = 1e-6;
  std::uint64_t fit_seed = 0;
  bool fit_hsmm_flag = false;
  fit->add_option("--series", fit_series, "input symbol series")->required();
  fit->add_option("--states", fit_states, "number of hidden states");
  fit->add_option("--restarts", fit_restarts, "random restarts");
  fit->add_option("--tolerance", fit_tol, "EM convergence tolerance");
  fit->add_option("--max-iter", fit_max_iter, "EM iteration cap");
  fit->add_option("--seed", fit_seed, "restart seed");
  fit->add_flag("--hsmm", fit_hsmm_flag,
                "fit the explicit-duration model instead");
  fit->add_option("--max-sojourn", fit_max_sojourn,
                  "sojourn support cap (with --hsmm)");
  fit->add_option("--model-out", fit_model_out, "write the model JSON here")
      ->required();

  // ---- decode ------------------------------------------------------------
  auto* dec = app.add_subcommand("decode", "Decode a series with a model");
  std::string dec_series, dec_model, dec_out, dec_method = "posterior";
  dec->add_option("--series", dec_series, "input symbol series")->required();
  dec->add_option("--model", dec_model, "model JSON")->required();
  dec->add_option("--method", dec_method, "posterior or viterbi")
      ->check(CLI::IsMember({"posterior", "viterbi"}));
  dec->add_option("--out", dec_out, "decode CSV (index,symbol,state)")
      ->required();

  // ---- patches -----------------------------------------------------------
  auto* pat = app.add_subcommand(
      "patches", "Decode one member and cut the path into patches");
  std::string pat_tx, pat_cal, pat_member, pat_model, pat_out;
  std::string pat_method = "posterior";
  long long pat_n_min = 10;
  bool pat_dedup = false;
  pat->add_option("--transactions", pat_tx, "transactions CSV")->required();
  pat->add_option("--calendar", pat_cal, "calendar JSON")->required();
  pat->add_option("--member", pat_member, "member id")->required();
  pat->add_option("--model", pat_model, "model JSON")->required();
  pat->add_option("--method", pat_method, "posterior or viterbi")
      ->check(CLI::IsMember({"posterior", "viterbi"}));
  pat->add_option("--n-min", pat_n_min, "keep patches with >= n transactions");
  pat->add_flag("--dedup", pat_dedup, "merge both-sides duplicate rows");
  pat->add_option("--out", pat_out, "patch CSV")->required();

  // ---- stats -------------------------------------------------------------
  auto* sta = app.add_subcommand(
      "stats", "Distributional statistics of a patch table");
  std::string sta_patches, sta_out_dir;
  double sta_quantile = 0.05;
  std::size_t sta_bins = 10;
  sta->add_option("--patches", sta_patches, "patch CSV")->required();
  sta->add_option("--hill-quantile", sta_quantile, "Hill tail fraction");
  sta->add_option("--bins", sta_bins, "bins for conditional means");
  sta->add_option("--out-dir", sta_out_dir, "output directory")->required();

  // ---- asymmetry ---------------------------------------------------------
  auto* asy = app.add_subcommand(
      "asymmetry", "Buy-sell deltas regressed on the monthly trend ratio");
  std::string asy_patches, asy_prices, asy_out_dir;
  long long asy_n_min = 10;
  asy->add_option("--patches", asy_patches, "patch CSV")->required();
  asy->add_option("--prices", asy_prices, "daily prices CSV (date,close)")
      ->required();
  asy->add_option("--n-min", asy_n_min, "patch length cut");
  asy->add_option("--out-dir", asy_out_dir, "output directory")->required();

  // ---- compare -----------------------------------------------------------
  auto* cmp = app.add_subcommand(
      "compare", "Cross-tabulate patches against an external segmentation");
  std::string cmp_patches, cmp_segments, cmp_out, cmp_assign = "midpoint";
  std::size_t cmp_bins = 8;
  cmp->add_option("--patches", cmp_patches, "patch CSV")->required();
  cmp->add_option("--segments", cmp_segments, "segment CSV")->required();
  cmp->add_option("--bins", cmp_bins, "segment-size bins");
  cmp->add_option("--assignment", cmp_assign,
                  "straddling-patch rule: midpoint or first")
      ->check(CLI::IsMember({"midpoint", "first"}));
  cmp->add_option("--out", cmp_out, "cross-tab CSV")->required();

  // ---- pipeline ----------------------------------------------------------
  auto* pip = app.add_subcommand(
      "pipeline", "Full batch run: fit, decode, patches, stats, reports");
  std::string pip_config;
  pipeline::RunConfig run_cfg;
  pip->add_option("--config", pip_config, "run config JSON");
  auto* o_tx = pip->add_option("--transactions", run_cfg.transactions_csv);
  auto* o_cal = pip->add_option("--calendar", run_cfg.calendar_json);
  auto* o_seg = pip->add_option("--segments", run_cfg.segments_csv);
  auto* o_mtx = pip->add_option("--min-transactions", run_cfg.min_transactions);
  auto* o_mad = pip->add_option("--min-active-days", run_cfg.min_active_days);
  auto* o_sts = pip->add_option("--states", run_cfg.num_states);
  auto* o_rst = pip->add_option("--restarts", run_cfg.restarts);
  auto* o_tol = pip->add_option("--tolerance", run_cfg.tolerance);
  auto* o_mit = pip->add_option("--max-iter", run_cfg.max_iterations);
  auto* o_hsm = pip->add_flag("--hsmm", run_cfg.use_hsmm);
  auto* o_msj = pip->add_option("--max-sojourn", run_cfg.max_sojourn);
  auto* o_sgl = pip->add_flag("--single-period", run_cfg.single_period);
  auto* o_nmn = pip->add_option("--n-min", run_cfg.n_min);
  auto* o_hq = pip->add_option("--hill-quantile", run_cfg.hill_quantile);
  auto* o_bin = pip->add_option("--bins", run_cfg.num_bins);
  auto* o_ddp = pip->add_flag("--dedup", run_cfg.deduplicate_both_sides);
  auto* o_sed = pip->add_option("--seed", run_cfg.seed);
  auto* o_out = pip->add_option("--out", run_cfg.output_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the parse error
    return code == 0 ? 0 : 2;
  }

  if (sim->parsed()) {
    gen.alternate_signs = !sim_no_alternate;
    fixture.with_quotes = !sim_no_quotes;
    const auto series = synthgen::generate_patched_series(gen);
    write_series(sim_series, series.observations);
    if (!sim_truth.empty()) {
      std::ofstream out(sim_truth);
      if (!out) throw ConfigError("cannot write " + sim_truth);
      out << "patch_id,dominant_sign,length\n";
      for (const auto& t : series.ground_truth)
        out << t.patch_id << ',' << t.dominant_sign << ',' << t.length << '\n';
    }
    if (!sim_tape.empty() || !sim_calendar.empty()) {
      if (sim_tape.empty() || sim_calendar.empty())
        throw ConfigError("--tape and --calendar go together");
      synthgen::emit_tape_fixture(series, fixture, sim_tape, sim_calendar);
    }
    std::cout << "series: " << series.observations.size() << " symbols, "
              << series.ground_truth.size() << " patches\n";
    return 0;
  }

  if (fit->parsed()) {
    const auto seq = read_series(fit_series);
    if (fit_hsmm_flag) {
      hsmm::FitConfig fc;
      fc.max_iterations = fit_max_iter;
      fc.tolerance = fit_tol;
      fc.restarts = fit_restarts;
      fc.seed = fit_seed;
      auto [model, report] = hsmm::fit_hsmm(seq, fit_states, fit_max_sojourn, fc);
      save_hsmm(model, fit_model_out);
      std::cout << "hsmm: lnL="
                << (report.log_likelihood_trace.empty()
                        ? 0.0
                        : report.log_likelihood_trace.back())
                << " iterations=" << report.iterations
                << " converged=" << (report.converged ? "yes" : "no") << "\n";
    } else {
      hmm::FitConfig fc;
      fc.max_iterations = fit_max_iter;
      fc.tolerance = fit_tol;
      fc.restarts = fit_restarts;
      fc.seed = fit_seed;
      const auto report = hmm::fit_baum_welch(seq, fit_states, fc);
      save_hmm(report.fitted_model, fit_model_out);
      std::cout << "hmm: lnL="
                << (report.log_likelihood_trace.empty()
                        ? 0.0
                        : report.log_likelihood_trace.back())
                << " iterations=" << report.iterations
                << " converged=" << (report.converged ? "yes" : "no")
                << (report.degenerate ? " degenerate" : "") << "\n";
    }
    return 0;
  }

  if (dec->parsed()) {
    const auto seq = read_series(dec_series);
    hmm::StatePath path;
    if (model_file_is_hsmm(dec_model)) {
      const auto model = load_hsmm(dec_model);
      path = hsmm::decode_hsmm(model, seq).path;
    } else {
      const auto model = load_hmm(dec_model);
      path = dec_method == "viterbi"
                 ? hmm::viterbi_decode(model, seq)
                 : hmm::posterior_decode(model, seq).path;
    }
    std::ofstream out(dec_out);
    if (!out) throw ConfigError("cannot write " + dec_out);
    out << "index,symbol,state\n";
    for (std::size_t i = 0; i < path.size(); ++i)
      out << i << ',' << seq.symbols[i] << ',' << path[i] << '\n';
    std::cout << "decoded " << path.size() << " positions\n";
    return 0;
  }

  if (pat->parsed()) {
    trades::LoadOptions opts;
    opts.deduplicate_both_sides = pat_dedup;
    trades::LoadResult loaded = trades::load_transactions_csv(pat_tx, opts);
    trades::MarketTape tape(std::move(loaded.transactions),
                            trades::TradingCalendar::from_json_file(pat_cal));
    const auto txs = member_transactions(tape, pat_member);
    const auto seq = patches::signs_to_symbols(txs);

    hmm::StatePath path;
    patches::StateLabeling labeling;
    if (model_file_is_hsmm(pat_model)) {
      const auto model = load_hsmm(pat_model);
      path = hsmm::decode_hsmm(model, seq).path;
      labeling = patches::label_states_from_emission(model.emission);
    } else {
      const auto model = load_hmm(pat_model);
      path = pat_method == "viterbi" ? hmm::viterbi_decode(model, seq)
                                     : hmm::posterior_decode(model, seq).path;
      labeling = patches::label_states(model);
    }
    const auto all = patches::extract_patches(path, labeling, txs, tape);
    const auto kept = patches::filter_min_length(all, pat_n_min);
    patches::write_patch_csv_file(pat_out, kept);
    std::cout << all.size() << " patches, " << kept.size()
              << " with n_tot >= " << pat_n_min << "\n";
    return 0;
  }

  if (sta->parsed()) {
    const auto ps = patches::read_patch_csv(sta_patches);
    if (ps.empty()) throw DataError("patch table is empty");
    ensure_dir(sta_out_dir);
    const std::filesystem::path dir = sta_out_dir;

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
    const patches::StateLabel labels[] = {patches::StateLabel::Buy,
                                          patches::StateLabel::Neutral,
                                          patches::StateLabel::Sell};

    std::ofstream hill(dir / "hill.csv");
    hill << "label,variable,n,k,exponent,ci_low,ci_high,status\n";
    std::ofstream ccdf(dir / "ccdf.csv");
    ccdf << "label,variable,value,prob\n";
    std::ofstream jb(dir / "jb.csv");
    jb << "label,variable,n,statistic,p_value,reject_at_0_01,status\n";
    for (auto label : labels) {
      for (const auto& var : vars) {
        std::vector<double> pos, all;
        for (const auto& p : ps) {
          if (p.label != label) continue;
          all.push_back(var.get(p));
          if (var.get(p) > 0) pos.push_back(var.get(p));
        }
        hill << patches::to_string(label) << ',' << var.name << ','
             << pos.size() << ',';
        try {
          const auto est = stats::hill_estimator(pos, sta_quantile);
          hill << est.k << ',' << format_double(est.exponent) << ','
               << format_double(est.ci_low) << ','
               << format_double(est.ci_high) << ",ok\n";
        } catch (const Error&) {
          hill << "0,nan,nan,nan,insufficient\n";
        }
        jb << patches::to_string(label) << ',' << var.name << ','
           << pos.size() << ',';
        try {
          const auto r = stats::jarque_bera_lognormal(pos);
          jb << format_double(r.statistic) << ',' << format_double(r.p_value)
             << ',' << (r.reject_at_0_01 ? 1 : 0) << ",ok\n";
        } catch (const Error&) {
          jb << "nan,nan,0,insufficient\n";
        }
        if (!all.empty())
          for (const auto& pt : stats::empirical_ccdf(all))
            ccdf << patches::to_string(label) << ',' << var.name << ','
                 << format_double(pt.value) << ',' << format_double(pt.prob)
                 << '\n';
      }
    }

    std::ofstream cond(dir / "conditional.csv");
    cond << "metric,label,bin_center,mean,standard_error,count\n";
    const Var metrics[] = {
        {"buy_volume_ratio",
         [](const patches::Patch& p) { return p.buy_volume_ratio; }},
        {"market_order_fraction",
         [](const patches::Patch& p) { return p.market_order_fraction; }},
        {"participation_rate",
         [](const patches::Patch& p) { return p.participation_rate; }},
    };
    for (const auto& metric : metrics) {
      for (auto label : labels) {
        std::vector<std::pair<double, double>> pairs;
        for (const auto& p : ps)
          if (p.label == label)
            pairs.emplace_back(double(p.n_tot), metric.get(p));
        bool any = false;
        for (const auto& pr : pairs)
          if (std::isfinite(pr.second)) any = true;
        if (!any) continue;
        for (const auto& bm :
             stats::conditional_mean_binned(pairs, stats::Binning::Log,
                                            sta_bins))
          cond << metric.name << ',' << patches::to_string(label) << ','
               << format_double(bm.bin_center) << ',' << format_double(bm.mean)
               << ',' << format_double(bm.standard_error) << ',' << bm.count
               << '\n';
      }
    }
    std::cout << "wrote hill.csv, ccdf.csv, jb.csv, conditional.csv to "
              << sta_out_dir << "\n";
    return 0;
  }

  if (asy->parsed()) {
    const auto ps = patches::read_patch_csv(asy_patches);
    const auto prices = read_prices_csv(asy_prices);
    const auto result = stats::asymmetry_by_trend(ps, prices, asy_n_min);
    ensure_dir(asy_out_dir);
    const std::filesystem::path dir = asy_out_dir;

    std::ofstream wout(dir / "trend_windows.csv");
    wout << "month,x,mean_daily_return,volatility,buy_count,buy_mean_length,"
            "buy_mean_market_order_fraction,buy_mean_participation,"
            "sell_count,sell_mean_length,sell_mean_market_order_fraction,"
            "sell_mean_participation\n";
    for (const auto& w : result.windows)
      wout << w.month << ',' << format_double(w.x) << ','
           << format_double(w.mean_daily_return) << ','
           << format_double(w.volatility) << ',' << w.buy.patch_count << ','
           << format_double(w.buy.mean_length) << ','
           << format_double(w.buy.mean_market_order_fraction) << ','
           << format_double(w.buy.mean_participation) << ','
           << w.sell.patch_count << ',' << format_double(w.sell.mean_length)
           << ',' << format_double(w.sell.mean_market_order_fraction) << ','
           << format_double(w.sell.mean_participation) << '\n';

    std::ofstream rout(dir / "asymmetry.csv");
    rout << "delta,slope,intercept,pearson_r,p_value,n,degenerate\n";
    const std::pair<const char*, const stats::RegressionSummary*> rows[] = {
        {"count", &result.delta_count},
        {"mean_length", &result.delta_mean_length},
        {"market_order_fraction", &result.delta_market_order_fraction},
        {"participation", &result.delta_participation}};
    for (const auto& [name, s] : rows)
      rout << name << ',' << format_double(s->slope) << ','
           << format_double(s->intercept) << ',' << format_double(s->pearson_r)
           << ',' << format_double(s->p_value) << ',' << s->n << ','
           << (s->degenerate ? 1 : 0) << '\n';
    std::cout << result.windows.size() << " windows ("
              << result.excluded_windows << " excluded)\n";
    return 0;
  }

  if (cmp->parsed()) {
    const auto ps = patches::read_patch_csv(cmp_patches);
    auto segments = compare::load_segments_csv(cmp_segments);
    compare::CrossTabOptions opts;
    opts.num_bins = cmp_bins;
    opts.assignment = cmp_assign == "first" ? compare::Assignment::FirstIndex
                                            : compare::Assignment::Midpoint;
    const auto rows = compare::cross_tabulate(ps, std::move(segments), opts);
    compare::write_cross_tab_csv_file(cmp_out, rows);
    std::cout << rows.size() << " cross-tab rows\n";
    return 0;
  }

  if (pip->parsed()) {
    pipeline::RunConfig cfg;
    if (!pip_config.empty()) cfg = pipeline::RunConfig::from_json_file(pip_config);
    // explicit flags override the config file
    if (o_tx->count()) cfg.transactions_csv = run_cfg.transactions_csv;
    if (o_cal->count()) cfg.calendar_json = run_cfg.calendar_json;
    if (o_seg->count()) cfg.segments_csv = run_cfg.segments_csv;
    if (o_mtx->count()) cfg.min_transactions = run_cfg.min_transactions;
    if (o_mad->count()) cfg.min_active_days = run_cfg.min_active_days;
    if (o_sts->count()) cfg.num_states = run_cfg.num_states;
    if (o_rst->count()) cfg.restarts = run_cfg.restarts;
    if (o_tol->count()) cfg.tolerance = run_cfg.tolerance;
    if (o_mit->count()) cfg.max_iterations = run_cfg.max_iterations;
    if (o_hsm->count()) cfg.use_hsmm = run_cfg.use_hsmm;
    if (o_msj->count()) cfg.max_sojourn = run_cfg.max_sojourn;
    if (o_sgl->count()) cfg.single_period = run_cfg.single_period;
    if (o_nmn->count()) cfg.n_min = run_cfg.n_min;
    if (o_hq->count()) cfg.hill_quantile = run_cfg.hill_quantile;
    if (o_bin->count()) cfg.num_bins = run_cfg.num_bins;
    if (o_ddp->count()) cfg.deduplicate_both_sides = run_cfg.deduplicate_both_sides;
    if (o_sed->count()) cfg.seed = run_cfg.seed;
    if (o_out->count()) cfg.output_dir = run_cfg.output_dir;

    const auto outcome = pipeline::run_pipeline(cfg);
    if (outcome.exit_code == 0)
      std::cout << outcome.message << "\noutputs: " << outcome.run_dir << "\n";
    else
      std::cerr << "pipeline failed: " << outcome.message << "\n";
    return outcome.exit_code;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const flowpatch::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return flowpatch::pipeline::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
