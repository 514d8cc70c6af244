#pragma once

#include <optional>
#include <vector>

#include "sdd/sdd_solver.hpp"
#include "sdd/time_transform.hpp"
#include "sdd/trajectory.hpp"

namespace sdd {

inline constexpr double denominator_floor = 1e-9;

// The state from which the constant-delay system is continued: z and alpha on
// [s_start - h, s_start] and chi(s_start).
struct transformed_state {
    double s_start = 0;
    trajectory z_history;
    trajectory alpha_history;
    double chi0 = 0;
};

struct transformed_solution {
    trajectory z;    // on [s0 - h, s0 + S]
    trajectory chi;  // on [s0, s0 + S]
    time_map alpha;  // on [s0 - h, s0 + S]
    omega_spec omega;
    params model;
    double ds = 0;

    double min_denominator = 0;
    double max_denominator = 0;
    double chi_excursion = 0;  // worst distance of chi outside [0, h]
    double alpha_residual = 0;  // sup |alpha(s) - chi(s) - alpha(s - h)| over the mesh
    double compatibility = 0;  // omega'(s0) D0 - omega'(s0 - h)
    std::vector<double> alpha_jumps;  // |alpha'(+) - alpha'(-)| at s0 + k h
    std::vector<double> z_jumps;
    std::vector<double> chi_jumps;

    [[nodiscard]] double s0() const noexcept { return omega.s0; }
    [[nodiscard]] double s_end() const { return chi.t_max(); }
};

// 1 + mu (chi - eta_bar) - G(z)
[[nodiscard]] double transformed_denominator(double chi, const vec& z, const params& p);

// {-mu (chi - eta_bar) + G(z)} alpha'(s - h) / (1 + mu (chi - eta_bar) - G(z))
[[nodiscard]] double chi_rhs(double chi, const vec& z, double alpha_dot_lag, const params& p);

// Method of steps for the explicit constant-delay form. z starts from g(omega(s)).
[[nodiscard]] transformed_solution integrate_transformed(const params& p, const initial_data& init,
                                                         const omega_spec& om, double horizon, double ds);

// Continues from an arbitrary state; integrate_transformed is this call with
// the state built from (g, eta0, omega).
[[nodiscard]] transformed_solution integrate_transformed_from(const params& p, const transformed_state& state,
                                                              double s_end, double ds);

// State of a solution at a mesh point s (must be at least h after the start).
[[nodiscard]] transformed_state state_at(const transformed_solution& ts, double s);

struct recovered_point {
    vec y;
    std::optional<double> eta;  // only defined for t >= t0
};

// y(t) = z(alpha^{-1}(t)), eta(t) = chi(alpha^{-1}(t)).
[[nodiscard]] recovered_point recover_original(const transformed_solution& ts, double t);

// g(t) = z(alpha^{-1}(t)) for t in [t0 - eta0, t0].
[[nodiscard]] vec restore_initial_history(const transformed_solution& ts, double t);

struct restart_report {
    double distance = 0;  // sup over [s_mid, s0 + S] of |dz| + |dchi| + |dalpha|
    double s_mid = 0;
};

// Runs to s0 + S directly and via a restart at s_mid; compares the endings.
[[nodiscard]] restart_report process_restart_check(const params& p, const initial_data& init,
                                                   const omega_spec& om, double s_mid, double horizon,
                                                   double ds);

}  // namespace sdd
