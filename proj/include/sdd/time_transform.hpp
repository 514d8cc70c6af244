#pragma once

#include <optional>

#include "sdd/monotone.hpp"
#include "sdd/sdd_solver.hpp"
#include "sdd/trajectory.hpp"

namespace sdd {

// Initial time function on [s0 - h, s0] with omega(s0) = t0 and
// omega(s0 - h) = t0 - eta0. Positivity of the derivative and the end values
// are enforced; compatibility with the model is measured, not enforced, so
// that incompatible data can be studied.
struct omega_spec {
    double s0 = 0;
    trajectory omega;
    double d0 = 0;  // omega'(s0)
};

// Throws errc::non_monotone or errc::invalid_params when omega is not an
// increasing function joining t0 - eta0 to t0 over a window of length h.
void validate(const omega_spec& om, const params& p, const initial_data& init);

// omega'(s0) [1 + mu (eta0 - eta_bar) - G(g(t0))] - omega'(s0 - h); zero when
// the transformed solution is C^1 across s0.
[[nodiscard]] double compatibility_residual(const omega_spec& om, const params& p, const initial_data& init);

// Single cubic with end slopes (d0 c, d0), c = 1 + mu (eta0 - eta_bar) - G(g(t0)).
[[nodiscard]] omega_spec default_omega(const initial_data& init, const params& p, double s0, double d0);

// Time transformation alpha on [s0 - h, s0 + S] stored on a uniform s-mesh.
class time_map {
   public:
    time_map() = default;
    time_map(monotone_fn alpha, double s0, double t0, double h);

    [[nodiscard]] double operator()(double s, side sd = side::right) const { return alpha_(s, sd); }
    [[nodiscard]] double derivative(double s, side sd = side::right) const { return alpha_.derivative(s, sd); }
    [[nodiscard]] double inverse(double t) const;

    [[nodiscard]] const monotone_fn& alpha() const noexcept { return alpha_; }
    [[nodiscard]] const trajectory& curve() const noexcept { return alpha_.underlying(); }
    [[nodiscard]] double s0() const noexcept { return s0_; }
    [[nodiscard]] double t0() const noexcept { return t0_; }
    [[nodiscard]] double h() const noexcept { return h_; }
    [[nodiscard]] interval domain() const { return alpha_.domain(); }
    [[nodiscard]] interval range() const { return alpha_.range(); }

   private:
    monotone_fn alpha_;
    double s0_ = 0;
    double t0_ = 0;
    double h_ = 0;
};

// alpha(s) = sigma^{-1}(alpha(s - h)) window by window, with
// alpha'(s) = alpha'(s - h) / sigma'(alpha(s)).
[[nodiscard]] time_map build_alpha(const sdd_solution& sol, const omega_spec& om, double horizon, double ds);

[[nodiscard]] double alpha_inverse(const time_map& map, double t);

struct bound_result {
    bool evaluated = false;
    bool pass = false;
    double worst_margin = 0;
    double worst_at = 0;  // s where the margin is smallest
};

struct alpha_bounds_report {
    bound_result upper;  // alpha(s) <= alpha(s0) + h + (s - s0)
    bound_result lower;  // alpha(s) >= alpha(s0) - h1 + (h1 / h)(s - s0)
};

inline constexpr double bound_tolerance = 1e-9;

// Margins over all mesh nodes with s >= s0.
[[nodiscard]] alpha_bounds_report alpha_bounds_check(const time_map& map, std::optional<double> h1 = std::nullopt);

// Affine envelope A1 t + B1 <= s <= A2 t + B2 in coordinates relative to the
// anchors (s - s0 against t), finite horizon only.
struct affine_envelope {
    double A1 = 0, B1 = 0, A2 = 0, B2 = 0;
};

struct time_equivalence {
    affine_envelope fitted;
    bool valid = false;
    double horizon = 0;  // S covered by the fit
    std::optional<affine_envelope> theoretical;  // from the delay floor h1
    bool theoretical_holds = false;
    bool dual_holds = false;
    double worst_theoretical_margin = 0;
};

[[nodiscard]] time_equivalence time_equivalence_constants(const time_map& map, std::optional<double> h1 = std::nullopt);

}  // namespace sdd
