#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "flowpatch/errors.hpp"
#include "flowpatch/synthgen.hpp"
#include "flowpatch/trades.hpp"
#include "oracles.hpp"

using namespace flowpatch;
using synthgen::GeneratedSeries;
using synthgen::PatchGenConfig;

namespace {

std::string tmp_path(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "flowpatch_synthgen";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_SUITE("synthgen") {

TEST_CASE("config validation") {
  PatchGenConfig cfg;
  cfg.num_patches = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = PatchGenConfig{};
  cfg.pareto_exponent = 1.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = PatchGenConfig{};
  cfg.bias = 0.5;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = PatchGenConfig{};
  cfg.bias = 1.0;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("inverse-CDF length draws at pinned uniforms") {
  PatchGenConfig cfg;  // mu = 2, x_min = 1
  // X = u^-1 then ceil.
  CHECK(synthgen::pareto_length_from_uniform(cfg, 0.5) == 2);
  CHECK(synthgen::pareto_length_from_uniform(cfg, 0.25) == 4);
  CHECK(synthgen::pareto_length_from_uniform(cfg, 0.1) == 10);
  CHECK(synthgen::pareto_length_from_uniform(cfg, 0.9) == 2);  // ceil(1.11)

  cfg.pareto_exponent = 3.0;  // X = u^-(1/2)
  CHECK(synthgen::pareto_length_from_uniform(cfg, 0.25) == 2);
  CHECK(synthgen::pareto_length_from_uniform(cfg, 1.0 / 16.0) == 4);

  cfg = PatchGenConfig{};
  cfg.min_length = 5;
  CHECK(synthgen::pareto_length_from_uniform(cfg, 0.5) == 10);
  // Draws can never undershoot the floor.
  CHECK(synthgen::pareto_length_from_uniform(cfg, 0.9999999) >= 5);
}

TEST_CASE("draw tail matches the target CCDF exponent") {
  // P(X > x) = (x/x_min)^-(mu-1) for the continuous draw; the ceiled
  // integer inherits the tail. Check the decade survival ratio.
  PatchGenConfig cfg;
  cfg.num_patches = 1;
  Rng rng(404);
  std::vector<double> draws;
  for (int i = 0; i < 200000; ++i)
    draws.push_back(static_cast<double>(synthgen::sample_pareto_length(cfg, rng)));
  auto survival = [&](double x) {
    std::size_t c = 0;
    for (double d : draws)
      if (d > x) ++c;
    return static_cast<double>(c) / static_cast<double>(draws.size());
  };
  // mu = 2: decade ratio of the survival function is 10.
  const double ratio = survival(10.0) / survival(100.0);
  CHECK(ratio == doctest::Approx(10.0).epsilon(0.15));
}

TEST_CASE("generated series structure: truth rows partition the symbols") {
  PatchGenConfig cfg;
  cfg.num_patches = 500;
  cfg.seed = 33;
  const GeneratedSeries series = synthgen::generate_patched_series(cfg);
  REQUIRE(series.ground_truth.size() == 500);

  std::size_t total = 0;
  int expected_sign = +1;
  for (const auto& truth : series.ground_truth) {
    CHECK(truth.length >= cfg.min_length);
    CHECK(truth.dominant_sign == expected_sign);
    expected_sign = -expected_sign;  // alternation starts at +1
    total += static_cast<std::size_t>(truth.length);
  }
  CHECK(total == series.observations.symbols.size());

  // Same seed reproduces, different seed does not.
  const GeneratedSeries again = synthgen::generate_patched_series(cfg);
  CHECK(again.observations.symbols == series.observations.symbols);
  cfg.seed = 34;
  CHECK(synthgen::generate_patched_series(cfg).observations.symbols !=
        series.observations.symbols);
}

TEST_CASE("bias 1 makes every patch pure; alternation can be disabled") {
  PatchGenConfig cfg;
  cfg.num_patches = 40;
  cfg.bias = 1.0;
  cfg.seed = 9;
  const GeneratedSeries series = synthgen::generate_patched_series(cfg);
  std::size_t pos = 0;
  for (const auto& truth : series.ground_truth) {
    const int symbol = truth.dominant_sign > 0 ? 1 : 0;
    for (int i = 0; i < truth.length; ++i)
      CHECK(series.observations.symbols[pos++] == symbol);
  }

  cfg.alternate_signs = false;
  const GeneratedSeries one_sided = synthgen::generate_patched_series(cfg);
  for (const auto& truth : one_sided.ground_truth)
    CHECK(truth.dominant_sign == +1);
}

TEST_CASE("dominant-sign frequency approaches the bias") {
  PatchGenConfig cfg;
  cfg.num_patches = 2000;
  cfg.bias = 0.95;
  cfg.seed = 77;
  const GeneratedSeries series = synthgen::generate_patched_series(cfg);
  std::size_t pos = 0, hits = 0, n = 0;
  for (const auto& truth : series.ground_truth) {
    const int symbol = truth.dominant_sign > 0 ? 1 : 0;
    for (int i = 0; i < truth.length; ++i, ++pos, ++n)
      if (series.observations.symbols[pos] == symbol) ++hits;
  }
  CHECK(static_cast<double>(hits) / static_cast<double>(n) ==
        doctest::Approx(0.95).epsilon(0.01));
}

TEST_CASE("tape fixture round-trips through the CSV loader") {
  PatchGenConfig cfg;
  cfg.num_patches = 60;
  cfg.seed = 5;
  const GeneratedSeries series = synthgen::generate_patched_series(cfg);

  synthgen::TapeFixtureConfig tape_cfg;
  tape_cfg.noise_fraction = 0.4;
  tape_cfg.seed = 6;
  const std::string csv = tmp_path("fixture.csv");
  const std::string cal = tmp_path("fixture_cal.json");
  synthgen::emit_tape_fixture(series, tape_cfg, csv, cal);

  const auto tape = trades::MarketTape::load(csv, cal);
  const auto member_rows = tape.member_indices("M0001");
  REQUIRE(member_rows.size() == series.observations.symbols.size());

  for (std::size_t i = 0; i < member_rows.size(); ++i) {
    const auto& tx = tape.transactions()[member_rows[i]];
    const int expected_sign = series.observations.symbols[i] == 1 ? +1 : -1;
    CHECK(tx.sign == expected_sign);
    CHECK(tx.shares >= tape_cfg.min_shares);
    CHECK(tx.shares <= tape_cfg.max_shares);
    CHECK(tx.price > 0.0);
    REQUIRE(tx.best_bid.has_value());
    REQUIRE(tx.best_ask.has_value());
    CHECK(*tx.best_bid < *tx.best_ask);
    // Trades print on the grid inside the declared sessions.
    CHECK(tape.calendar().contains(tx.timestamp));
  }

  // The noise member interleaves but never collides with the tracked one.
  const auto noise_rows = tape.member_indices("NOISE");
  CHECK(noise_rows.size() > 0);
  CHECK(noise_rows.size() + member_rows.size() == tape.transactions().size());
}

TEST_CASE("fixture without quotes still loads and classifies by tick test") {
  PatchGenConfig cfg;
  cfg.num_patches = 30;
  cfg.seed = 15;
  const GeneratedSeries series = synthgen::generate_patched_series(cfg);

  synthgen::TapeFixtureConfig tape_cfg;
  tape_cfg.with_quotes = false;
  tape_cfg.noise_fraction = 0.0;
  const std::string csv = tmp_path("noquotes.csv");
  const std::string cal = tmp_path("noquotes_cal.json");
  synthgen::emit_tape_fixture(series, tape_cfg, csv, cal);

  const auto tape = trades::MarketTape::load(csv, cal);
  std::size_t classified = 0;
  for (const auto& tx : tape.transactions()) {
    CHECK_FALSE(tx.best_bid.has_value());
    if (trades::classify_initiator(tx) != trades::Initiator::Unclassified)
      ++classified;
  }
  // The price walk moves, so the tick test resolves most trades.
  CHECK(classified > tape.transactions().size() / 2);
}

TEST_CASE("fixture config validation") {
  synthgen::TapeFixtureConfig cfg;
  cfg.session_close_seconds = cfg.session_open_seconds;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = synthgen::TapeFixtureConfig{};
  cfg.trade_interval_seconds = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = synthgen::TapeFixtureConfig{};
  cfg.min_shares = 200;
  cfg.max_shares = 100;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = synthgen::TapeFixtureConfig{};
  cfg.noise_fraction = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

}  // TEST_SUITE
