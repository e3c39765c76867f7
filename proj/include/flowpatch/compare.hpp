#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "flowpatch/patches.hpp"

namespace flowpatch::compare {

// One patch from an external coarse segmentation of the same member
// transaction sequences the model patches were cut from.
struct SegmentPatch {
  std::string member_id;
  patches::StateLabel type = patches::StateLabel::Neutral;
  std::size_t first_index = 0;
  std::size_t last_index = 0;

  std::size_t n_seg() const { return last_index - first_index + 1; }
};

// CSV columns: member_id, type, first_index, last_index. Validates that
// segments are disjoint and ordered per member.
std::vector<SegmentPatch> load_segments_csv(const std::string& path);
void validate_segments(std::vector<SegmentPatch>& segments);  // sorts in place

// How a model patch that straddles a segment boundary is attributed.
enum class Assignment { Midpoint, FirstIndex };

struct CrossTabOptions {
  Assignment assignment = Assignment::Midpoint;
  std::size_t num_bins = 8;  // log bins over observed segment sizes
};

struct CrossTabRow {
  patches::StateLabel segment_type = patches::StateLabel::Neutral;
  patches::StateLabel hmm_state = patches::StateLabel::Neutral;
  double nseg_bin_center = 0.0;
  double mean_patch_count = 0.0;  // model patches assigned to the segment
  double mean_tx_count = 0.0;     // transactions inside, exact by index
  std::size_t n_segments = 0;
};

// Average composition of segments in terms of model patches, per segment
// type and segment-size bin. Patch-to-segment assignment follows
// options.assignment; transaction counts use index overlap and therefore
// sum to n_seg across states. Requires both partitions to span the same
// index range for every member with segments.
std::vector<CrossTabRow> cross_tabulate(
    const std::vector<patches::Patch>& hmm_patches,
    std::vector<SegmentPatch> segments, const CrossTabOptions& options = {});

// Long format: segment_type, hmm_state, nseg_bin, mean_patch_count,
// mean_tx_count, n_segments.
void write_cross_tab_csv(std::ostream& out,
                         const std::vector<CrossTabRow>& rows);
void write_cross_tab_csv_file(const std::string& path,
                              const std::vector<CrossTabRow>& rows);

}  // namespace flowpatch::compare
