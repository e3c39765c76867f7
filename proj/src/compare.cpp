#include "flowpatch/compare.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "flowpatch/numfmt.hpp"

namespace flowpatch::compare {

namespace {

patches::StateLabel parse_label(const std::string& text, std::size_t line) {
  if (text == "buy") return patches::StateLabel::Buy;
  if (text == "neutral") return patches::StateLabel::Neutral;
  if (text == "sell") return patches::StateLabel::Sell;
  throw DataError("segment file line " + std::to_string(line) +
                  ": unknown type '" + text + "'");
}

std::size_t label_slot(patches::StateLabel l) {
  switch (l) {
    case patches::StateLabel::Buy: return 0;
    case patches::StateLabel::Neutral: return 1;
    case patches::StateLabel::Sell: return 2;
  }
  return 1;
}

constexpr std::array<patches::StateLabel, 3> kLabelOrder = {
    patches::StateLabel::Buy, patches::StateLabel::Neutral,
    patches::StateLabel::Sell};

}  // namespace

void validate_segments(std::vector<SegmentPatch>& segments) {
  std::stable_sort(segments.begin(), segments.end(),
                   [](const SegmentPatch& a, const SegmentPatch& b) {
                     if (a.member_id != b.member_id)
                       return a.member_id < b.member_id;
                     return a.first_index < b.first_index;
                   });
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].first_index > segments[i].last_index)
      throw DataError("segment for member " + segments[i].member_id +
                      " has first_index > last_index");
    if (i > 0 && segments[i].member_id == segments[i - 1].member_id &&
        segments[i].first_index <= segments[i - 1].last_index)
      throw DataError("segments overlap for member " + segments[i].member_id);
  }
}

std::vector<SegmentPatch> load_segments_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open segment file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("segment file is empty");
  std::vector<SegmentPatch> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    SegmentPatch seg;
    std::string type_text, first_text, last_text;
    if (!std::getline(ss, seg.member_id, ',') ||
        !std::getline(ss, type_text, ',') ||
        !std::getline(ss, first_text, ',') || !std::getline(ss, last_text))
      throw DataError("segment file line " + std::to_string(line_no) +
                      ": expected member_id,type,first_index,last_index");
    seg.type = parse_label(type_text, line_no);
    try {
      seg.first_index = static_cast<std::size_t>(std::stoull(first_text));
      seg.last_index = static_cast<std::size_t>(std::stoull(last_text));
    } catch (const std::exception&) {
      throw DataError("segment file line " + std::to_string(line_no) +
                      ": bad index");
    }
    out.push_back(std::move(seg));
  }
  validate_segments(out);
  return out;
}

std::vector<CrossTabRow> cross_tabulate(
    const std::vector<patches::Patch>& hmm_patches,
    std::vector<SegmentPatch> segments, const CrossTabOptions& options) {
  if (options.num_bins == 0)
    throw DomainError("cross_tabulate: need at least one size bin");
  validate_segments(segments);

  // Group patches by member and check that both partitions span the same
  // index range wherever segments exist.
  std::map<std::string, std::vector<const patches::Patch*>> by_member;
  for (const auto& p : hmm_patches) by_member[p.member_id].push_back(&p);
  for (auto& [member, list] : by_member)
    std::sort(list.begin(), list.end(),
              [](const patches::Patch* a, const patches::Patch* b) {
                return a->first_index < b->first_index;
              });

  std::map<std::string, std::pair<std::size_t, std::size_t>> seg_span;
  for (const auto& s : segments) {
    auto [it, inserted] =
        seg_span.emplace(s.member_id, std::make_pair(s.first_index,
                                                     s.last_index));
    if (!inserted) {
      it->second.first = std::min(it->second.first, s.first_index);
      it->second.second = std::max(it->second.second, s.last_index);
    }
  }
  for (const auto& [member, span] : seg_span) {
    auto it = by_member.find(member);
    if (it == by_member.end())
      throw DomainError("cross_tabulate: member " + member +
                        " has segments but no model patches");
    const std::size_t p_first = it->second.front()->first_index;
    const std::size_t p_last = it->second.back()->last_index;
    if (p_first != span.first || p_last != span.second)
      throw DomainError("cross_tabulate: index spaces differ for member " +
                        member);
  }

  // Per-segment composition: counts of assigned patches and of covered
  // transactions, by patch label.
  struct SegStats {
    patches::StateLabel type;
    double n_seg;
    std::array<double, 3> patch_count{};
    std::array<double, 3> tx_count{};
  };
  std::vector<SegStats> stats;
  stats.reserve(segments.size());
  for (const auto& seg : segments) {
    SegStats st;
    st.type = seg.type;
    st.n_seg = static_cast<double>(seg.n_seg());
    auto it = by_member.find(seg.member_id);
    if (it != by_member.end()) {
      for (const patches::Patch* p : it->second) {
        if (p->first_index > seg.last_index || p->last_index < seg.first_index)
          continue;
        const std::size_t slot = label_slot(p->label);
        const std::size_t lo = std::max(p->first_index, seg.first_index);
        const std::size_t hi = std::min(p->last_index, seg.last_index);
        st.tx_count[slot] += static_cast<double>(hi - lo + 1);
        const std::size_t anchor =
            options.assignment == Assignment::Midpoint
                ? (p->first_index + p->last_index) / 2
                : p->first_index;
        if (anchor >= seg.first_index && anchor <= seg.last_index)
          st.patch_count[slot] += 1.0;
      }
    }
    stats.push_back(st);
  }
  if (stats.empty()) return {};

  // Log bins over the observed segment sizes.
  double lo = stats.front().n_seg, hi = lo;
  for (const auto& st : stats) {
    lo = std::min(lo, st.n_seg);
    hi = std::max(hi, st.n_seg);
  }
  const double la = std::log(lo);
  const double width = (std::log(hi) - la) / static_cast<double>(options.num_bins);

  struct Group {
    std::array<double, 3> patch_sum{};
    std::array<double, 3> tx_sum{};
    std::size_t count = 0;
  };
  std::map<std::pair<std::size_t, std::size_t>, Group> groups;  // (type, bin)
  for (const auto& st : stats) {
    std::size_t bin = 0;
    if (width > 0.0) {
      bin = static_cast<std::size_t>((std::log(st.n_seg) - la) / width);
      if (bin >= options.num_bins) bin = options.num_bins - 1;
    }
    Group& g = groups[{label_slot(st.type), bin}];
    for (std::size_t s = 0; s < 3; ++s) {
      g.patch_sum[s] += st.patch_count[s];
      g.tx_sum[s] += st.tx_count[s];
    }
    g.count += 1;
  }

  std::vector<CrossTabRow> rows;
  for (const auto& [key, g] : groups) {
    const auto [type_slot, bin] = key;
    const double center =
        width > 0.0 ? std::exp(la + (static_cast<double>(bin) + 0.5) * width)
                    : lo;
    for (std::size_t s = 0; s < 3; ++s) {
      CrossTabRow row;
      row.segment_type = kLabelOrder[type_slot];
      row.hmm_state = kLabelOrder[s];
      row.nseg_bin_center = center;
      row.mean_patch_count = g.patch_sum[s] / static_cast<double>(g.count);
      row.mean_tx_count = g.tx_sum[s] / static_cast<double>(g.count);
      row.n_segments = g.count;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_cross_tab_csv(std::ostream& out,
                         const std::vector<CrossTabRow>& rows) {
  out << "segment_type,hmm_state,nseg_bin,mean_patch_count,mean_tx_count,"
         "n_segments\n";
  for (const auto& r : rows) {
    out << patches::to_string(r.segment_type) << ','
        << patches::to_string(r.hmm_state) << ','
        << format_double(r.nseg_bin_center) << ','
        << format_double(r.mean_patch_count) << ','
        << format_double(r.mean_tx_count) << ',' << r.n_segments << '\n';
  }
}

void write_cross_tab_csv_file(const std::string& path,
                              const std::vector<CrossTabRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write cross-tab file: " + path);
  write_cross_tab_csv(out, rows);
}

}  // namespace flowpatch::compare
