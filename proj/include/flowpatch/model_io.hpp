#pragma once

#include <string>

#include "flowpatch/hmm.hpp"
#include "flowpatch/hsmm.hpp"

namespace flowpatch {

// JSON model format: {"num_states", "num_symbols", "transition" (row-major),
// "emission" (row-major), "initial"}. The HSMM format adds "sojourn"
// (row-major N x max_sojourn) and "max_sojourn". Values round-trip exactly
// (shortest-round-trip decimal serialization).

std::string hmm_to_json(const hmm::HmmModel& model);
hmm::HmmModel hmm_from_json(const std::string& text);

std::string hsmm_to_json(const hsmm::HsmmModel& model);
hsmm::HsmmModel hsmm_from_json(const std::string& text);

void save_hmm(const hmm::HmmModel& model, const std::string& path);
hmm::HmmModel load_hmm(const std::string& path);

void save_hsmm(const hsmm::HsmmModel& model, const std::string& path);
hsmm::HsmmModel load_hsmm(const std::string& path);

}  // namespace flowpatch
