#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sdd {

enum class errc {
    out_of_domain,
    bracket_invalid,
    no_convergence,
    invalid_params,
    invalid_h1,
    certificate_required,
    step_too_large,
    step_mismatch,
    iteration_diverged,
    horizon_too_long,
    eta_zero,
    non_monotone,
    solution_too_short,
    denominator_vanished,
    horizon_mismatch,
    not_decaying,
    unanchored_check,
};

std::string_view to_string(errc code) noexcept;

// Single exception type for the numeric library; callers branch on code().
class error : public std::runtime_error {
   public:
    error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    [[nodiscard]] errc code() const noexcept { return code_; }

   private:
    errc code_;
};

}  // namespace sdd
