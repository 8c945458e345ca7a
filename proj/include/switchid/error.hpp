#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace switchid {

enum class Errc {
  invalid_argument,
  series_too_short,
  divergent_trajectory,
  degenerate_signal,
  rank_deficient_regressors,
  too_large,
  zero_column,
  leverage_one,
  empty_block,
  infeasible_dwell,
  degenerate_fit,
  no_block_assigned,
  no_progress,
  rank_deficient_assignment,
  extraction_stalled,
  policy_unavailable,
  constant_reference,
  io,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace switchid
