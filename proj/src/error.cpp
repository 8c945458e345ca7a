#include "switchid/error.hpp"

namespace switchid {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::series_too_short: return "series-too-short";
    case Errc::divergent_trajectory: return "divergent-trajectory";
    case Errc::degenerate_signal: return "degenerate-signal";
    case Errc::rank_deficient_regressors: return "rank-deficient-regressors";
    case Errc::too_large: return "too-large";
    case Errc::zero_column: return "zero-column";
    case Errc::leverage_one: return "leverage-one";
    case Errc::empty_block: return "empty-block";
    case Errc::infeasible_dwell: return "infeasible-dwell";
    case Errc::degenerate_fit: return "degenerate-fit";
    case Errc::no_block_assigned: return "no-block-assigned";
    case Errc::no_progress: return "no-progress";
    case Errc::rank_deficient_assignment: return "rank-deficient-assignment";
    case Errc::extraction_stalled: return "extraction-stalled";
    case Errc::policy_unavailable: return "policy-unavailable";
    case Errc::constant_reference: return "constant-reference";
    case Errc::io: return "io";
  }
  return "unknown";
}

}  // namespace switchid
