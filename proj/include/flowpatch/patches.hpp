#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "flowpatch/hmm.hpp"
#include "flowpatch/trades.hpp"

namespace flowpatch::patches {

enum class StateLabel { Buy, Neutral, Sell };

const char* to_string(StateLabel label);

// Assignment of Buy/Neutral/Sell roles to the three model states, ranked
// by each state's buy-emission probability.
struct StateLabeling {
  std::array<StateLabel, 3> label_of_state{};
  std::array<double, 3> buy_emission{};  // raw P(buy | state), kept so
                                         // degenerate fits stay visible
  bool ambiguous = false;                // exact tie broken by state index

  int state_for(StateLabel label) const;
};

// One maximal run of a single decoded state over a member's transactions,
// with every per-patch measurement attached.
struct Patch {
  std::string member_id;
  StateLabel label = StateLabel::Neutral;
  int state = 0;                 // decoded model state index
  std::size_t first_index = 0;   // into the member's transaction sequence
  std::size_t last_index = 0;
  double t_first = 0.0;
  double t_last = 0.0;
  double duration_seconds = 0.0;  // trading time only
  long long n_buy = 0;
  long long n_sell = 0;
  long long n_tot = 0;
  double v_buy = 0.0;   // euro volume
  double v_sell = 0.0;
  double v_tot = 0.0;
  double buy_volume_ratio = 0.0;
  long long market_order_count = 0;       // member was the Lee-Ready initiator
  long long market_order_classified = 0;  // trades with a classifiable side
  double market_order_fraction = 0.0;     // NaN when nothing was classifiable
  double participation_rate = 0.0;        // v_tot / interval market volume
};

// Rank states by buy-emission probability: highest becomes Buy, lowest
// Sell, the remaining one Neutral. Requires a 3-state, 2-symbol model.
StateLabeling label_states(const hmm::HmmModel& model);

// Same ranking applied to a bare 3x2 emission matrix (works for any model
// family sharing the discrete-emission convention).
StateLabeling label_states_from_emission(const Matrix& emission);

// Convert a member's signed trades to the binary symbol sequence the
// models consume: buy -> 1, sell -> 0.
hmm::ObservationSequence signs_to_symbols(
    const std::vector<trades::Transaction>& member_txs);

// Cut a decoded state path into maximal constant-state runs and measure
// each run against the market tape. index_offset shifts the recorded
// indices when member_txs is a slice (e.g. one year) of a longer sequence.
std::vector<Patch> extract_patches(
    const hmm::StatePath& path, const StateLabeling& labeling,
    const std::vector<trades::Transaction>& member_txs,
    const trades::MarketTape& tape, std::size_t index_offset = 0);

// Keep patches with at least n_min transactions (Table-style cut).
std::vector<Patch> filter_min_length(const std::vector<Patch>& patches,
                                     long long n_min = 10);

// One row per patch, ordered by (member_id, t_first); fixed header.
void write_patch_csv(std::ostream& out, std::vector<Patch> patches);
void write_patch_csv_file(const std::string& path,
                          const std::vector<Patch>& patches);

// Inverse of write_patch_csv (same column set).
std::vector<Patch> read_patch_csv(const std::string& path);

}  // namespace flowpatch::patches
