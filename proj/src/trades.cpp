#include "flowpatch/trades.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "flowpatch/timeutil.hpp"

namespace flowpatch::trades {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Split one CSV record. Handles double-quoted fields with "" escapes;
// no support for embedded newlines (member ids are opaque but single-line).
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(field);
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

bool parse_int(const std::string& s, long long& out) {
  std::string t = trim(s);
  if (!t.empty() && t[0] == '+') t.erase(0, 1);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

}  // namespace

TradingCalendar::TradingCalendar(std::vector<Session> sessions)
    : sessions_(std::move(sessions)) {
  std::sort(sessions_.begin(), sessions_.end(),
            [](const Session& a, const Session& b) { return a.open < b.open; });
  for (std::size_t i = 0; i < sessions_.size(); ++i) {
    if (!(sessions_[i].open < sessions_[i].close))
      throw ConfigError("calendar session " + std::to_string(i) +
                        ": open must precede close");
    if (i > 0 && sessions_[i].open < sessions_[i - 1].close)
      throw ConfigError("calendar sessions overlap at index " +
                        std::to_string(i));
  }
}

TradingCalendar TradingCalendar::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("calendar JSON: ") + e.what());
  }
  if (!j.is_array())
    throw ConfigError("calendar JSON must be a list of sessions");
  std::vector<Session> sessions;
  sessions.reserve(j.size());
  for (const auto& entry : j) {
    if (!entry.contains("date") || !entry.contains("open") ||
        !entry.contains("close"))
      throw ConfigError("calendar entry needs date, open, close");
    const double day = timeutil::epoch_seconds(
        timeutil::parse_date(entry.at("date").get<std::string>()));
    const double open =
        day + timeutil::parse_time_of_day(entry.at("open").get<std::string>());
    const double close =
        day + timeutil::parse_time_of_day(entry.at("close").get<std::string>());
    sessions.push_back({open, close});
  }
  return TradingCalendar(std::move(sessions));
}

TradingCalendar TradingCalendar::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open calendar file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

bool TradingCalendar::contains(double t) const {
  // Sessions are [open, close), but an instant stamped exactly at a close
  // (e.g. a closing print) is attributed to that session rather than to
  // the overnight gap.
  auto it = std::upper_bound(
      sessions_.begin(), sessions_.end(), t,
      [](double v, const Session& s) { return v < s.open; });
  if (it == sessions_.begin()) return false;
  --it;
  return t <= it->close;
}

TradingCalendar::Elapsed TradingCalendar::trading_time_elapsed(
    double t_start, double t_end) const {
  if (t_start > t_end)
    throw DomainError("trading_time_elapsed: t_start exceeds t_end");
  Elapsed result;
  result.clamped = !contains(t_start) || !contains(t_end);
  for (const Session& s : sessions_) {
    if (s.close <= t_start) continue;
    if (s.open >= t_end) break;
    const double lo = std::max(s.open, t_start);
    const double hi = std::min(s.close, t_end);
    if (hi > lo) result.seconds += hi - lo;
  }
  return result;
}

LoadResult load_transactions_csv(const std::string& path,
                                 const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open transactions file: " + path);

  std::string line;
  if (!std::getline(in, line))
    throw DataError("transactions file is empty: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::unordered_map<std::string, std::size_t> column;
  {
    const auto header = split_csv(line);
    for (std::size_t i = 0; i < header.size(); ++i)
      column[trim(header[i])] = i;
  }
  for (const char* req : {"timestamp", "member_id", "sign", "shares", "price"})
    if (!column.count(req))
      throw ConfigError(std::string("transactions file missing column: ") +
                        req);
  const bool has_bid = column.count("bid") > 0;
  const bool has_ask = column.count("ask") > 0;

  auto field = [&](const std::vector<std::string>& row,
                   const char* name) -> const std::string& {
    return row[column.at(name)];
  };

  LoadResult result;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++result.rows_read;

    const auto row = split_csv(line);
    if (row.size() < column.size()) {
      result.errors.push_back({line_no, "too few fields"});
      continue;
    }

    Transaction tx;
    try {
      tx.timestamp = timeutil::parse_iso8601(trim(field(row, "timestamp")));
    } catch (const Error& e) {
      result.errors.push_back({line_no, e.what()});
      continue;
    }
    tx.member_id = trim(field(row, "member_id"));
    if (tx.member_id.empty()) {
      result.errors.push_back({line_no, "empty member_id"});
      continue;
    }
    long long sign = 0;
    if (!parse_int(field(row, "sign"), sign) || (sign != 1 && sign != -1)) {
      result.errors.push_back({line_no, "sign must be +1 or -1"});
      continue;
    }
    tx.sign = static_cast<int>(sign);
    if (!parse_int(field(row, "shares"), tx.shares) || tx.shares <= 0) {
      result.errors.push_back({line_no, "shares must be a positive integer"});
      continue;
    }
    if (!parse_double(field(row, "price"), tx.price) || tx.price <= 0) {
      result.errors.push_back({line_no, "price must be positive"});
      continue;
    }
    auto parse_quote = [&](const char* name,
                           std::optional<double>& slot) -> bool {
      const std::string raw = trim(field(row, name));
      if (raw.empty()) return true;  // optional column left blank
      double v = 0.0;
      if (!parse_double(raw, v) || v <= 0) {
        result.errors.push_back(
            {line_no, std::string(name) + " must be positive when present"});
        return false;
      }
      slot = v;
      return true;
    };
    if (has_bid && !parse_quote("bid", tx.best_bid)) continue;
    if (has_ask && !parse_quote("ask", tx.best_ask)) continue;
    if (tx.best_bid && tx.best_ask && !(*tx.best_bid < *tx.best_ask)) {
      result.errors.push_back({line_no, "bid must be below ask"});
      continue;
    }

    if (!result.transactions.empty() &&
        tx.timestamp < result.transactions.back().timestamp)
      ++result.reorder_count;
    result.transactions.push_back(std::move(tx));
  }

  if (result.rows_read > 0) {
    const double frac = static_cast<double>(result.errors.size()) /
                        static_cast<double>(result.rows_read);
    if (frac > options.max_malformed_fraction) {
      std::ostringstream msg;
      msg << path << ": " << result.errors.size() << " of " << result.rows_read
          << " rows malformed (limit "
          << options.max_malformed_fraction * 100.0 << "%); first error line "
          << result.errors.front().line << ": "
          << result.errors.front().message;
      throw DataError(msg.str());
    }
  }

  std::stable_sort(result.transactions.begin(), result.transactions.end(),
                   [](const Transaction& a, const Transaction& b) {
                     return a.timestamp < b.timestamp;
                   });

  if (options.deduplicate_both_sides && !result.transactions.empty()) {
    // A both-sides feed reports each matched trade twice, once from each
    // counterparty. Within every equal-timestamp group, pair off rows with
    // equal shares and price but opposite signs and keep the earlier one.
    std::vector<Transaction> kept;
    kept.reserve(result.transactions.size());
    std::size_t i = 0;
    const auto& txs = result.transactions;
    while (i < txs.size()) {
      std::size_t j = i;
      while (j < txs.size() && txs[j].timestamp == txs[i].timestamp) ++j;
      std::vector<bool> dropped(j - i, false);
      for (std::size_t a = i; a < j; ++a) {
        if (dropped[a - i]) continue;
        for (std::size_t b = a + 1; b < j; ++b) {
          if (dropped[b - i]) continue;
          if (txs[b].shares == txs[a].shares && txs[b].price == txs[a].price &&
              txs[b].sign == -txs[a].sign) {
            dropped[b - i] = true;
            ++result.deduplicated;
            break;
          }
        }
      }
      for (std::size_t a = i; a < j; ++a)
        if (!dropped[a - i]) kept.push_back(txs[a]);
      i = j;
    }
    result.transactions = std::move(kept);
  }

  // Tick-test reference: last trade price on the tape distinct from the
  // current one. Derived here so downstream classification is pure.
  double last_price = 0.0;
  double last_distinct = 0.0;
  bool have_last = false, have_distinct = false;
  for (Transaction& tx : result.transactions) {
    if (have_last && last_price != tx.price) {
      tx.prev_price = last_price;
    } else if (have_distinct && last_distinct != tx.price) {
      tx.prev_price = last_distinct;
    }
    if (have_last && tx.price != last_price) {
      last_distinct = last_price;
      have_distinct = true;
    }
    last_price = tx.price;
    have_last = true;
  }

  return result;
}

MarketTape::MarketTape(std::vector<Transaction> transactions,
                       TradingCalendar calendar)
    : transactions_(std::move(transactions)), calendar_(std::move(calendar)) {
  for (std::size_t i = 1; i < transactions_.size(); ++i)
    if (transactions_[i].timestamp < transactions_[i - 1].timestamp)
      throw DataError("market tape timestamps must be non-decreasing");
  volume_prefix_.resize(transactions_.size() + 1, 0.0);
  for (std::size_t i = 0; i < transactions_.size(); ++i)
    volume_prefix_[i + 1] = volume_prefix_[i] + transactions_[i].euro_volume();
}

MarketTape MarketTape::load(const std::string& csv_path,
                            const std::string& calendar_json_path,
                            const LoadOptions& options) {
  LoadResult loaded = load_transactions_csv(csv_path, options);
  return MarketTape(std::move(loaded.transactions),
                    TradingCalendar::from_json_file(calendar_json_path));
}

double MarketTape::market_volume_between(double t_start, double t_end) const {
  if (t_start > t_end)
    throw DomainError("market_volume_between: t_start exceeds t_end");
  const auto lo = std::lower_bound(
      transactions_.begin(), transactions_.end(), t_start,
      [](const Transaction& tx, double v) { return tx.timestamp < v; });
  const auto hi = std::upper_bound(
      transactions_.begin(), transactions_.end(), t_end,
      [](double v, const Transaction& tx) { return v < tx.timestamp; });
  const std::size_t a = static_cast<std::size_t>(lo - transactions_.begin());
  const std::size_t b = static_cast<std::size_t>(hi - transactions_.begin());
  return volume_prefix_[b] - volume_prefix_[a];
}

std::vector<std::string> MarketTape::member_ids() const {
  std::vector<std::string> ids;
  ids.reserve(transactions_.size());
  for (const Transaction& tx : transactions_) ids.push_back(tx.member_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<std::size_t> MarketTape::member_indices(
    const std::string& member_id) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < transactions_.size(); ++i)
    if (transactions_[i].member_id == member_id) out.push_back(i);
  return out;
}

Initiator classify_initiator(const Transaction& tx) {
  if (tx.best_bid && tx.best_ask) {
    const double mid = 0.5 * (*tx.best_bid + *tx.best_ask);
    if (tx.price > mid) return Initiator::BuyerInitiated;
    if (tx.price < mid) return Initiator::SellerInitiated;
    // at the midpoint: fall through to the tick test
  }
  if (tx.prev_price) {
    if (tx.price > *tx.prev_price) return Initiator::BuyerInitiated;
    if (tx.price < *tx.prev_price) return Initiator::SellerInitiated;
  }
  return Initiator::Unclassified;
}

const char* to_string(Initiator i) {
  switch (i) {
    case Initiator::BuyerInitiated: return "buyer_initiated";
    case Initiator::SellerInitiated: return "seller_initiated";
    case Initiator::Unclassified: return "unclassified";
  }
  return "unclassified";
}

}  // namespace flowpatch::trades
