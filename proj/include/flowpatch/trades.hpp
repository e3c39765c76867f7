#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowpatch/errors.hpp"

namespace flowpatch::trades {

// One matched on-book trade seen from the tracked member's perspective.
struct Transaction {
  double timestamp = 0.0;  // epoch seconds, fractional part allowed
  std::string member_id;
  int sign = 0;  // +1 member buys, -1 member sells
  long long shares = 0;
  double price = 0.0;
  std::optional<double> best_bid;
  std::optional<double> best_ask;
  std::optional<double> prev_price;  // last distinct trade price

  double euro_volume() const { return static_cast<double>(shares) * price; }
};

enum class Initiator { BuyerInitiated, SellerInitiated, Unclassified };

// Ordered, disjoint [open, close) trading sessions; closed periods exist
// only by omission.
class TradingCalendar {
public:
  struct Session {
    double open = 0.0;
    double close = 0.0;
  };

  TradingCalendar() = default;
  explicit TradingCalendar(std::vector<Session> sessions);

  static TradingCalendar from_json_file(const std::string& path);
  static TradingCalendar from_json_text(const std::string& text);

  const std::vector<Session>& sessions() const { return sessions_; }

  bool contains(double t) const;

  struct Elapsed {
    double seconds = 0.0;
    bool clamped = false;  // an endpoint fell outside every session
  };
  // Within-session seconds between two instants.
  Elapsed trading_time_elapsed(double t_start, double t_end) const;

private:
  std::vector<Session> sessions_;
};

struct LoadOptions {
  double max_malformed_fraction = 0.001;
  // Merge both-sides feeds: rows equal in (timestamp, shares, price) with
  // opposite signs collapse to the first row.
  bool deduplicate_both_sides = false;
};

struct RowError {
  std::size_t line = 0;
  std::string message;
};

class MarketTape;

struct LoadResult {
  std::vector<Transaction> transactions;
  std::vector<RowError> errors;
  std::size_t rows_read = 0;
  std::size_t reorder_count = 0;    // rows arriving out of timestamp order
  std::size_t deduplicated = 0;     // rows merged by the dedup flag
};

// Parse and validate the transactions CSV. Throws DataError when the
// malformed-row fraction exceeds options.max_malformed_fraction.
LoadResult load_transactions_csv(const std::string& path,
                                 const LoadOptions& options = {});

// Time-ordered record of all trades in one stock plus its calendar.
class MarketTape {
public:
  MarketTape() = default;
  MarketTape(std::vector<Transaction> transactions, TradingCalendar calendar);

  static MarketTape load(const std::string& csv_path,
                         const std::string& calendar_json_path,
                         const LoadOptions& options = {});

  const std::vector<Transaction>& transactions() const { return transactions_; }
  const TradingCalendar& calendar() const { return calendar_; }

  // Total euro volume of tape trades with timestamp in [t_start, t_end].
  double market_volume_between(double t_start, double t_end) const;

  // Member ids present, sorted.
  std::vector<std::string> member_ids() const;

  // Indices into transactions() of one member's trades, in time order.
  std::vector<std::size_t> member_indices(const std::string& member_id) const;

private:
  std::vector<Transaction> transactions_;
  TradingCalendar calendar_;
  std::vector<double> volume_prefix_;  // prefix sums of euro volume
};

// Lee-Ready initiator classification: prevailing-quote midpoint rule with
// a tick-test fallback on the last distinct price.
Initiator classify_initiator(const Transaction& tx);

const char* to_string(Initiator i);

}  // namespace flowpatch::trades
