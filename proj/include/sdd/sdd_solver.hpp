#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sdd/monotone.hpp"
#include "sdd/trajectory.hpp"

namespace sdd {

// f(t, y(t), y(t - eta(t)))
using rhs_fn = std::function<vec(double t, const vec& y, const vec& y_delayed)>;
// G(y), the forcing of the delay equation.
using delay_forcing_fn = std::function<double(const vec& y)>;

// Model data of the delay system
//
//   y'(t)   = f(t, y(t), y(t - eta(t)))
//   eta'(t) = -mu (eta(t) - eta_bar) + G(y(t))
//
// The maximal delay h is always 2 eta_bar. Lipschitz constants and the bound
// on |G| are declared by the caller, not estimated.
class params {
   public:
    struct fields {
        double mu = 0;
        double eta_bar = 0;
        int dim = 1;
        rhs_fn f;
        delay_forcing_fn G;
        double lip_f = 0;
        double lip_G = 0;
        double g_sup = 0;
        bool autonomous = true;
    };

    // Throws errc::invalid_params on non-positive mu/eta_bar, missing callables,
    // or g_sup > mu * eta_bar.
    explicit params(fields in);

    [[nodiscard]] double mu() const noexcept { return in_.mu; }
    [[nodiscard]] double eta_bar() const noexcept { return in_.eta_bar; }
    [[nodiscard]] double h() const noexcept { return 2 * in_.eta_bar; }
    [[nodiscard]] int dim() const noexcept { return in_.dim; }
    [[nodiscard]] double lip_f() const noexcept { return in_.lip_f; }
    [[nodiscard]] double lip_G() const noexcept { return in_.lip_G; }
    [[nodiscard]] double g_sup() const noexcept { return in_.g_sup; }
    [[nodiscard]] bool autonomous() const noexcept { return in_.autonomous; }

    [[nodiscard]] vec f(double t, const vec& y, const vec& y_delayed) const { return in_.f(t, y, y_delayed); }
    [[nodiscard]] double G(const vec& y) const { return in_.G(y); }
    [[nodiscard]] double eta_rate(double eta, const vec& y) const {
        return -in_.mu * (eta - in_.eta_bar) + in_.G(y);
    }

   private:
    fields in_;
};

struct initial_data {
    trajectory g;  // history on [t0 - h, t0]
    double eta0 = 0;
    double t0 = 0;
};

// Throws errc::invalid_params when the history does not cover [t0 - h, t0]
// or eta0 lies outside [0, h].
void validate(const params& p, const initial_data& init);

// 2 mu eta_bar < 1: the deviating argument is increasing along every solution.
[[nodiscard]] bool monotonicity_certificate(const params& p) noexcept;
[[nodiscard]] double sigma_slope_bound(const params& p) noexcept;

// g_sup <= mu (eta_bar - h1): eta stays above h1 once it starts there.
[[nodiscard]] bool delay_floor_certificate(const params& p, double h1);

struct sdd_solution {
    trajectory y;    // on [t0 - h, T], history included
    trajectory eta;  // on [t0, T]
    std::optional<monotone_fn> sigma;
    params model;
    initial_data initial;
    double dt = 0;
    double eta_excursion = 0;  // worst distance of a mesh value of eta outside [0, h]
    std::size_t overlap_steps = 0;

    [[nodiscard]] double t0() const noexcept { return initial.t0; }
    [[nodiscard]] double t_end() const { return eta.t_max(); }
};

struct sdd_options {
    bool require_sigma = false;
};

// Classical RK4 on (y, eta) with dense cubic Hermite output. The delayed value
// is read from the stored trajectory; when the delayed argument lands inside
// the current step, the step is repeated with the freshest in-step interpolant
// until the increment settles.
[[nodiscard]] sdd_solution integrate_sdd(const params& p, const initial_data& init, double t_end,
                                         double dt, sdd_options options = {});

struct picard_trace {
    sdd_solution iterate;
    std::vector<double> increments;  // sup |y_k - y_{k-1}| + |eta_k - eta_{k-1}|, k = 1..iters
};

// Successive approximation of the integral form of the system on a short
// horizon. Independent of integrate_sdd; used as its reference.
[[nodiscard]] picard_trace picard_iterate(const params& p, const initial_data& init, double t_end,
                                          int iters, double dt = 1e-3);
[[nodiscard]] sdd_solution picard_oracle(const params& p, const initial_data& init, double t_end,
                                         int iters, double dt = 1e-3);

[[nodiscard]] double deviating_argument(const sdd_solution& sol, double t);
[[nodiscard]] double sigma_inverse(const sdd_solution& sol, double tau);

// Sup of |y'| over the mesh (both one-sided values), history included.
[[nodiscard]] double lipschitz_estimate_y(const sdd_solution& sol);

struct lipschitz_diagnostic {
    double observed_f = 0;
    double observed_G = 0;
    bool f_consistent = true;
    bool G_consistent = true;
};

// Samples difference quotients of f and G between mesh states of a solution
// and compares them to the declared constants.
[[nodiscard]] lipschitz_diagnostic diagnose_lipschitz(const sdd_solution& sol, std::size_t samples = 200);

}  // namespace sdd
