#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdd/sdd_solver.hpp"
#include "sdd/time_transform.hpp"
#include "sdd/transformed_solver.hpp"

namespace sdd {

enum class relation { at_most, at_least };

// One pass/fail line. `claim` states the mathematical property being checked
// (for example "z(s) = y(alpha(s))"); a check without one is rejected.
struct check_result {
    std::string name;
    std::string claim;
    double value = 0;
    relation rel = relation::at_most;
    double threshold = 0;
    bool pass = false;
};

struct metric {
    std::string name;
    std::string claim;
    double value = 0;
};

class verification_report {
   public:
    explicit verification_report(std::string scenario) : scenario_(std::move(scenario)) {}

    const check_result& check(std::string name, std::string claim, double value, relation rel, double threshold);
    // Boolean claim: recorded with value 1 (holds) or 0, threshold 1.
    const check_result& require(std::string name, std::string claim, bool holds);
    void note(std::string name, std::string claim, double value);

    void merge(const verification_report& other);
    void set_table(std::vector<std::string> columns, std::vector<std::vector<double>> rows);
    void set_runtime(double seconds) noexcept { runtime_ = seconds; }

    [[nodiscard]] const std::string& scenario() const noexcept { return scenario_; }
    [[nodiscard]] const std::vector<check_result>& checks() const noexcept { return checks_; }
    [[nodiscard]] const std::vector<metric>& metrics() const noexcept { return metrics_; }
    [[nodiscard]] const std::vector<std::string>& columns() const noexcept { return columns_; }
    [[nodiscard]] const std::vector<std::vector<double>>& rows() const noexcept { return rows_; }
    [[nodiscard]] double runtime() const noexcept { return runtime_; }
    [[nodiscard]] bool all_pass() const noexcept;
    [[nodiscard]] const check_result* find(std::string_view name) const;

    [[nodiscard]] nlohmann::json to_json() const;

   private:
    std::string scenario_;
    std::vector<check_result> checks_;
    std::vector<metric> metrics_;
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
    double runtime_ = 0;
};

inline constexpr double equivalence_tolerance = 1e-5;

// Sup over grid points of |z(s) - y(alpha(s))|, |chi(s) - eta(alpha(s))|
// and |y(t) - z(alpha^{-1}(t))|.
[[nodiscard]] verification_report verify_equivalence(const sdd_solution& sdd, const transformed_solution& ts,
                                                     std::size_t grid = 2001);

// Copy of ts with alpha shifted by a constant; fault-injection hook.
[[nodiscard]] transformed_solution corrupt_alpha(const transformed_solution& ts, double shift);

// Resamples a history on a uniform mesh of spacing dt, adding delta (1 + cos(t - t0))
// to every component.
[[nodiscard]] initial_data perturbed_initial(const initial_data& base, const params& p, double delta, double dt);

struct dependence_row {
    double delta = 0;
    double observed = 0;  // sup over [t0, T] of |dy| + |deta|
    double bound = 0;     // Gronwall estimate
    double g_shift = 0;   // sup |dg|
    double eta_shift = 0;
};

[[nodiscard]] std::vector<dependence_row> continuous_dependence_rows(const params& p, const initial_data& base,
                                                                     const std::vector<double>& deltas, double t_end,
                                                                     double dt);
[[nodiscard]] verification_report continuous_dependence_experiment(const params& p, const initial_data& base,
                                                                   const std::vector<double>& deltas, double t_end,
                                                                   double dt = 1e-3);

struct alpha_convergence_row {
    double delta = 0;
    double distance = 0;       // max over [s0, s0 + S] of |alpha_n - alpha_bar|
    double min_slope = 0;      // exact minimum of alpha_n'
    double recursion_floor = 0;  // min omega_n' / (1 + 2 mu eta_bar)^windows
};

[[nodiscard]] std::vector<alpha_convergence_row> alpha_convergence_rows(const params& p, const initial_data& base,
                                                                        double s0, double d0,
                                                                        const std::vector<double>& deltas,
                                                                        double horizon, double ds);
[[nodiscard]] verification_report alpha_convergence_experiment(const params& p, const initial_data& base, double s0,
                                                                double d0, const std::vector<double>& deltas,
                                                                double horizon, double ds = 1e-3);

struct rate_fit {
    double rate = 0;       // decay rate, -slope of log|x|
    double intercept = 0;
    double r_squared = 0;
};

// Least squares on log|x| over the final half of the mesh; throws
// errc::not_decaying when the tail norm is not decreasing.
[[nodiscard]] rate_fit fit_decay_rate(const trajectory& x, double from);

struct stability_summary {
    rate_fit t_rate;  // of y in t
    rate_fit s_rate;  // of z in s
    double alpha_slope = 0;  // mean slope of alpha over [s0, s0 + S]
    double max_t_condition = 0;  // sup over t of D2 (t - t0) - D1 (alpha^{-1}(t) - s0)
    double max_s_condition = 0;  // sup over s of C2 (s - s0) - C1 (alpha(s) - t0)
    double feasible_t_rate = 0;  // largest D2 making the t-condition hold for the fitted D1
    double feasible_s_rate = 0;  // largest C2 making the s-condition hold for the fitted C1
};

inline constexpr double rate_fit_min_r_squared = 0.99;

[[nodiscard]] stability_summary stability_summary_of(const sdd_solution& sdd, const transformed_solution& ts);
[[nodiscard]] verification_report stability_transfer_check(const sdd_solution& sdd, const transformed_solution& ts);

struct assumption_estimates {
    double sup_alpha_slope = 0;        // sup alpha'
    double sup_inverse_slope = 0;      // sup (alpha^{-1})' = 1 / inf alpha'
    double inf_inverse_slope_fd = 0;   // finite-difference inf of (alpha^{-1})'
    double growth_offset = 0;          // k1 with alpha(s) <= C1 s + k1
    double growth_margin = 0;          // worst margin of that bound on the mesh
    std::vector<double> gaps;          // h / 2^k, k = 0..8
    std::vector<double> modulus_alpha;
    std::vector<double> modulus_inverse;
    std::vector<double> modulus_alpha_slope;
    std::vector<double> modulus_inverse_slope;
};

[[nodiscard]] assumption_estimates estimate_assumptions(const time_map& map, double horizon);
[[nodiscard]] verification_report alpha_regularity_report(const time_map& map, double horizon);

// |g'(t0) - f(t0, g(t0), g(t0 - eta0))|
[[nodiscard]] double manifold_residual(const params& p, const initial_data& init);
// The same residual for the segment of a solution ending at t.
[[nodiscard]] double manifold_residual_at(const sdd_solution& sol, double t);

// sup |y| over [t1, T] against sup |z| over [alpha^{-1}(t1), alpha^{-1}(T)] on a shared mesh.
[[nodiscard]] verification_report boundedness_transfer_check(const sdd_solution& sdd, const transformed_solution& ts,
                                                             double t1);

struct order_result {
    double error_coarse = 0;
    double error_fine = 0;
    double ratio = 0;
};

// Errors at dt and dt/2 against a dt/8 reference.
[[nodiscard]] order_result sdd_convergence_order(const params& p, const initial_data& init, double t_end, double dt);
[[nodiscard]] order_result transformed_convergence_order(const params& p, const initial_data& init,
                                                         const omega_spec& om, double horizon, double ds);

}  // namespace sdd
