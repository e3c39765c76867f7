#include "flowpatch/patches.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <ostream>
#include <sstream>

#include "flowpatch/numfmt.hpp"
#include "flowpatch/timeutil.hpp"

namespace flowpatch::patches {

const char* to_string(StateLabel label) {
  switch (label) {
    case StateLabel::Buy: return "buy";
    case StateLabel::Neutral: return "neutral";
    case StateLabel::Sell: return "sell";
  }
  return "neutral";
}

int StateLabeling::state_for(StateLabel label) const {
  for (int i = 0; i < 3; ++i)
    if (label_of_state[static_cast<std::size_t>(i)] == label) return i;
  throw DomainError("state labeling is not a bijection");
}

StateLabeling label_states(const hmm::HmmModel& model) {
  if (model.num_states != 3)
    throw DomainError("state labeling needs a 3-state model, got " +
                      std::to_string(model.num_states));
  if (model.num_symbols != 2)
    throw DomainError("state labeling needs binary emissions, got " +
                      std::to_string(model.num_symbols) + " symbols");
  return label_states_from_emission(model.emission);
}

StateLabeling label_states_from_emission(const Matrix& emission) {
  if (emission.rows() != 3 || emission.cols() != 2)
    throw DomainError("state labeling needs a 3x2 emission matrix");

  StateLabeling out;
  for (int i = 0; i < 3; ++i)
    out.buy_emission[static_cast<std::size_t>(i)] = emission(i, 1);

  // Sort state indices by buy emission, descending; stable so exact ties
  // fall back to index order.
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return out.buy_emission[static_cast<std::size_t>(a)] >
           out.buy_emission[static_cast<std::size_t>(b)];
  });
  out.ambiguous =
      out.buy_emission[static_cast<std::size_t>(order[0])] ==
          out.buy_emission[static_cast<std::size_t>(order[1])] ||
      out.buy_emission[static_cast<std::size_t>(order[1])] ==
          out.buy_emission[static_cast<std::size_t>(order[2])];
  out.label_of_state[static_cast<std::size_t>(order[0])] = StateLabel::Buy;
  out.label_of_state[static_cast<std::size_t>(order[1])] = StateLabel::Neutral;
  out.label_of_state[static_cast<std::size_t>(order[2])] = StateLabel::Sell;
  return out;
}

hmm::ObservationSequence signs_to_symbols(
    const std::vector<trades::Transaction>& member_txs) {
  hmm::ObservationSequence seq;
  seq.symbols.reserve(member_txs.size());
  for (const auto& tx : member_txs) seq.symbols.push_back(tx.sign > 0 ? 1 : 0);
  return seq;
}

std::vector<Patch> extract_patches(
    const hmm::StatePath& path, const StateLabeling& labeling,
    const std::vector<trades::Transaction>& member_txs,
    const trades::MarketTape& tape, std::size_t index_offset) {
  if (path.size() != member_txs.size())
    throw DomainError("state path length " + std::to_string(path.size()) +
                      " does not match transaction count " +
                      std::to_string(member_txs.size()));
  std::vector<Patch> out;
  if (path.empty()) return out;

  std::size_t start = 0;
  for (std::size_t i = 1; i <= path.size(); ++i) {
    if (i < path.size() && path[i] == path[start]) continue;

    Patch p;
    p.member_id = member_txs[start].member_id;
    p.state = path[start];
    p.label = labeling.label_of_state[static_cast<std::size_t>(path[start])];
    p.first_index = index_offset + start;
    p.last_index = index_offset + i - 1;
    p.t_first = member_txs[start].timestamp;
    p.t_last = member_txs[i - 1].timestamp;
    p.duration_seconds =
        tape.calendar().trading_time_elapsed(p.t_first, p.t_last).seconds;

    for (std::size_t k = start; k < i; ++k) {
      const auto& tx = member_txs[k];
      const double euro = tx.euro_volume();
      if (tx.sign > 0) {
        ++p.n_buy;
        p.v_buy += euro;
      } else {
        ++p.n_sell;
        p.v_sell += euro;
      }
      switch (trades::classify_initiator(tx)) {
        case trades::Initiator::BuyerInitiated:
          ++p.market_order_classified;
          if (tx.sign > 0) ++p.market_order_count;
          break;
        case trades::Initiator::SellerInitiated:
          ++p.market_order_classified;
          if (tx.sign < 0) ++p.market_order_count;
          break;
        case trades::Initiator::Unclassified:
          break;
      }
    }
    p.n_tot = p.n_buy + p.n_sell;
    p.v_tot = p.v_buy + p.v_sell;
    p.buy_volume_ratio = p.v_tot > 0 ? p.v_buy / p.v_tot : 0.0;
    p.market_order_fraction =
        p.market_order_classified > 0
            ? static_cast<double>(p.market_order_count) /
                  static_cast<double>(p.market_order_classified)
            : std::numeric_limits<double>::quiet_NaN();
    const double interval_volume =
        tape.market_volume_between(p.t_first, p.t_last);
    p.participation_rate = interval_volume > 0
                               ? p.v_tot / interval_volume
                               : std::numeric_limits<double>::quiet_NaN();

    out.push_back(std::move(p));
    start = i;
  }
  return out;
}

std::vector<Patch> filter_min_length(const std::vector<Patch>& patches,
                                     long long n_min) {
  if (n_min <= 0)
    std::cerr << "warning: patch length filter n_min=" << n_min
              << " keeps everything\n";
  std::vector<Patch> out;
  out.reserve(patches.size());
  for (const Patch& p : patches)
    if (p.n_tot >= n_min) out.push_back(p);
  return out;
}

void write_patch_csv(std::ostream& out, std::vector<Patch> patches) {
  std::stable_sort(patches.begin(), patches.end(),
                   [](const Patch& a, const Patch& b) {
                     if (a.member_id != b.member_id)
                       return a.member_id < b.member_id;
                     return a.t_first < b.t_first;
                   });
  out << "member_id,label,state,first_index,last_index,t_first,t_last,"
         "duration_seconds,n_buy,n_sell,n_tot,v_buy,v_sell,v_tot,"
         "buy_volume_ratio,market_order_count,market_order_classified,"
         "market_order_fraction,participation_rate\n";
  for (const Patch& p : patches) {
    out << p.member_id << ',' << to_string(p.label) << ',' << p.state << ','
        << p.first_index << ',' << p.last_index << ','
        << timeutil::format_iso8601(p.t_first) << ','
        << timeutil::format_iso8601(p.t_last) << ','
        << format_double(p.duration_seconds) << ',' << p.n_buy << ','
        << p.n_sell << ',' << p.n_tot << ',' << format_double(p.v_buy) << ','
        << format_double(p.v_sell) << ',' << format_double(p.v_tot) << ','
        << format_double(p.buy_volume_ratio) << ',' << p.market_order_count
        << ',' << p.market_order_classified << ','
        << format_double(p.market_order_fraction) << ','
        << format_double(p.participation_rate) << '\n';
  }
}

void write_patch_csv_file(const std::string& path,
                          const std::vector<Patch>& patches) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write patch file: " + path);
  write_patch_csv(out, patches);
}

namespace {

StateLabel label_from_string(const std::string& text, std::size_t line) {
  if (text == "buy") return StateLabel::Buy;
  if (text == "neutral") return StateLabel::Neutral;
  if (text == "sell") return StateLabel::Sell;
  throw DataError("patch file line " + std::to_string(line) +
                  ": unknown label '" + text + "'");
}

}  // namespace

std::vector<Patch> read_patch_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open patch file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("patch file is empty: " + path);

  std::vector<Patch> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 19)
      throw DataError("patch file line " + std::to_string(line_no) +
                      ": expected 19 fields, got " + std::to_string(f.size()));
    try {
      Patch p;
      p.member_id = f[0];
      p.label = label_from_string(f[1], line_no);
      p.state = std::stoi(f[2]);
      p.first_index = static_cast<std::size_t>(std::stoull(f[3]));
      p.last_index = static_cast<std::size_t>(std::stoull(f[4]));
      p.t_first = timeutil::parse_iso8601(f[5]);
      p.t_last = timeutil::parse_iso8601(f[6]);
      p.duration_seconds = std::stod(f[7]);
      p.n_buy = std::stoll(f[8]);
      p.n_sell = std::stoll(f[9]);
      p.n_tot = std::stoll(f[10]);
      p.v_buy = std::stod(f[11]);
      p.v_sell = std::stod(f[12]);
      p.v_tot = std::stod(f[13]);
      p.buy_volume_ratio = std::stod(f[14]);
      p.market_order_count = std::stoll(f[15]);
      p.market_order_classified = std::stoll(f[16]);
      p.market_order_fraction = std::stod(f[17]);
      p.participation_rate = std::stod(f[18]);
      out.push_back(std::move(p));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw DataError("patch file line " + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  return out;
}

}  // namespace flowpatch::patches
