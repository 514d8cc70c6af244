#include "sdd/time_transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sdd/error.hpp"

namespace sdd {

namespace {

bool divides(double whole, double step) {
    const double ratio = whole / step;
    return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio);
}

// First node index with s >= s0.
std::size_t anchor_index(const trajectory& curve, double s0) {
    const auto nodes = curve.nodes();
    const double slack = 1e-12 * (1 + std::abs(s0));
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), s0 - slack);
    return static_cast<std::size_t>(it - nodes.begin());
}

}  // namespace

void validate(const omega_spec& om, const params& p, const initial_data& init) {
    const trajectory& w = om.omega;
    if (w.empty() || w.dim() != 1) throw error(errc::invalid_params, "omega must be a scalar trajectory");
    const double h = p.h();
    const double slack = 1e-12 * (1 + std::abs(om.s0) + h);
    if (std::abs(w.t_min() - (om.s0 - h)) > slack || std::abs(w.t_max() - om.s0) > slack) {
        throw error(errc::invalid_params, "omega must be defined on [s0 - h, s0]");
    }
    if (!(init.eta0 > 0)) throw error(errc::eta_zero, "a time function needs eta0 > 0");
    const double vtol = 1e-12 * (1 + std::abs(init.t0));
    if (std::abs(w.node_value(w.node_count() - 1, 0) - init.t0) > vtol ||
        std::abs(w.node_value(0, 0) - (init.t0 - init.eta0)) > vtol) {
        throw error(errc::invalid_params, "omega must satisfy omega(s0) = t0 and omega(s0 - h) = t0 - eta0");
    }
    if (!(w.min_derivative() > 0)) throw error(errc::non_monotone, "omega must have a positive derivative");
}

double compatibility_residual(const omega_spec& om, const params& p, const initial_data& init) {
    const vec g0 = init.g.eval(init.t0, side::left);
    const double factor = 1 + p.mu() * (init.eta0 - p.eta_bar()) - p.G(g0);
    const double end_slope = om.omega.slope(om.omega.t_max(), 0, side::left);
    const double start_slope = om.omega.slope(om.omega.t_min(), 0, side::right);
    return end_slope * factor - start_slope;
}

omega_spec default_omega(const initial_data& init, const params& p, double s0, double d0) {
    if (!(init.eta0 > 0)) {
        throw error(errc::eta_zero, "eta0 = 0 leaves no room for omega(s0 - h) < t0");
    }
    if (!(d0 > 0)) throw error(errc::invalid_params, "d0 must be positive");
    const vec g0 = init.g.eval(init.t0, side::left);
    const double factor = 1 + p.mu() * (init.eta0 - p.eta_bar()) - p.G(g0);
    trajectory_builder b(1);
    b.push(s0 - p.h(), init.t0 - init.eta0, d0 * factor, d0 * factor);
    b.push(s0, init.t0, d0, d0);
    omega_spec om{.s0 = s0, .omega = std::move(b).finish(), .d0 = d0};
    if (!(om.omega.min_derivative() > 0)) {
        std::ostringstream msg;
        msg << "omega cubic is not increasing for d0 = " << d0 << "; adjust d0";
        throw error(errc::non_monotone, msg.str());
    }
    return om;
}

time_map::time_map(monotone_fn alpha, double s0, double t0, double h)
    : alpha_(std::move(alpha)), s0_(s0), t0_(t0), h_(h) {}

double time_map::inverse(double t) const {
    const interval r = range();
    const double slack = 1e-12 * (1 + std::abs(t));
    if (!(t >= r.lo - slack && t <= r.hi + slack)) {
        throw error(errc::out_of_domain, "time outside the range of alpha");
    }
    return invert_monotone(alpha_, std::clamp(t, r.lo, r.hi));
}

time_map build_alpha(const sdd_solution& sol, const omega_spec& om, double horizon, double ds) {
    if (!sol.sigma) {
        throw error(errc::certificate_required, "time transformation needs 2 mu eta_bar < 1");
    }
    const double h = sol.model.h();
    if (!(ds > 0) || !divides(h, ds)) throw error(errc::step_mismatch, "ds must divide h");
    if (!(horizon > 0)) throw error(errc::invalid_params, "horizon must be positive");
    const auto per_window = static_cast<std::size_t>(std::llround(h / ds));
    const auto ahead = static_cast<std::size_t>(std::ceil(horizon / ds - 1e-9));
    const double s0 = om.s0;
    const monotone_fn& sigma = *sol.sigma;
    const double sigma_top = sigma.range().hi;

    const std::size_t total = per_window + ahead + 1;
    std::vector<double> value(total), d_left(total), d_right(total);
    const auto node = [&](std::size_t n) {
        return s0 + (static_cast<double>(n) - static_cast<double>(per_window)) * ds;
    };
    for (std::size_t n = 0; n <= per_window; ++n) {
        const double s = n == 0 ? om.omega.t_min() : node(n);
        value[n] = om.omega.value(s);
        d_left[n] = om.omega.slope(s, 0, side::left);
        d_right[n] = om.omega.slope(s, 0, side::right);
    }
    value[per_window] = sol.t0();

    for (std::size_t n = per_window; n < total; ++n) {
        const std::size_t lag = n - per_window;
        if (n > per_window) {
            if (value[lag] > sigma_top) {
                std::ostringstream msg;
                msg << "SDD solution ends at t = " << sol.t_end() << ", too short for alpha at s = " << node(n);
                throw error(errc::solution_too_short, msg.str());
            }
            value[n] = sigma_inverse(sol, value[lag]);
            d_left[n] = d_left[lag] / sigma.derivative(value[n], side::left);
        }
        d_right[n] = d_right[lag] / sigma.derivative(value[n], side::right);
    }

    trajectory_builder b(1);
    b.reserve(total);
    for (std::size_t n = 0; n < total; ++n) {
        b.push(n == 0 ? om.omega.t_min() : node(n), value[n], d_left[n], d_right[n]);
    }
    return time_map(monotone_fn(std::move(b).finish()), s0, sol.t0(), h);
}

double alpha_inverse(const time_map& map, double t) { return map.inverse(t); }

alpha_bounds_report alpha_bounds_check(const time_map& map, std::optional<double> h1) {
    const trajectory& curve = map.curve();
    const std::size_t first = anchor_index(curve, map.s0());
    const double a0 = map(map.s0());
    const double h = map.h();
    alpha_bounds_report out;
    out.upper = {.evaluated = true, .pass = true, .worst_margin = std::numeric_limits<double>::infinity(), .worst_at = 0};
    if (h1) {
        out.lower = {.evaluated = true, .pass = true, .worst_margin = std::numeric_limits<double>::infinity(), .worst_at = 0};
    }
    for (std::size_t i = first; i < curve.node_count(); ++i) {
        const double s = curve.nodes()[i];
        const double rel = s - map.s0();
        const double a = curve.node_value(i, 0);
        const double upper = a0 + h + rel - a;
        if (upper < out.upper.worst_margin) out.upper = {true, true, upper, s};
        if (h1) {
            const double lower = a - (a0 - *h1 + (*h1 / h) * rel);
            if (lower < out.lower.worst_margin) out.lower = {true, true, lower, s};
        }
    }
    out.upper.pass = out.upper.worst_margin >= -bound_tolerance;
    if (h1) out.lower.pass = out.lower.worst_margin >= -bound_tolerance;
    return out;
}

time_equivalence time_equivalence_constants(const time_map& map, std::optional<double> h1) {
    const trajectory& curve = map.curve();
    const std::size_t first = anchor_index(curve, map.s0());
    const std::size_t n = curve.node_count() - first;
    time_equivalence out;
    out.horizon = curve.t_max() - map.s0();
    if (n < 2) return out;

    // Least-squares slope of (s - s0) against t, then the tightest intercepts.
    double mt = 0, ms = 0;
    for (std::size_t i = first; i < curve.node_count(); ++i) {
        mt += curve.node_value(i, 0);
        ms += curve.nodes()[i] - map.s0();
    }
    mt /= static_cast<double>(n);
    ms /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = first; i < curve.node_count(); ++i) {
        const double dt = curve.node_value(i, 0) - mt;
        sxy += dt * (curve.nodes()[i] - map.s0() - ms);
        sxx += dt * dt;
    }
    const double slope = sxy / sxx;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = first; i < curve.node_count(); ++i) {
        const double off = curve.nodes()[i] - map.s0() - slope * curve.node_value(i, 0);
        lo = std::min(lo, off);
        hi = std::max(hi, off);
    }
    out.fitted = {.A1 = slope, .B1 = lo, .A2 = slope, .B2 = hi};
    out.valid = std::isfinite(slope) && slope > 0;

    const auto envelope_margin = [&](const affine_envelope& e) {
        double worst = std::numeric_limits<double>::infinity();
        double worst_dual = worst;
        for (std::size_t i = first; i < curve.node_count(); ++i) {
            const double s = curve.nodes()[i] - map.s0();
            const double t = curve.node_value(i, 0);
            worst = std::min({worst, s - (e.A1 * t + e.B1), (e.A2 * t + e.B2) - s});
            worst_dual = std::min({worst_dual, t - (s / e.A2 - e.B2 / e.A2), (s / e.A1 - e.B1 / e.A1) - t});
        }
        return std::pair{worst, worst_dual};
    };

    const double tol = bound_tolerance;
    if (out.valid) out.dual_holds = envelope_margin(out.fitted).second >= -tol;
    if (h1) {
        const double h = map.h();
        const double a0 = map(map.s0());
        const affine_envelope theory{.A1 = 1, .B1 = -(a0 + h), .A2 = h / *h1, .B2 = -(h / *h1) * (a0 - *h1)};
        const auto [margin, dual] = envelope_margin(theory);
        out.theoretical = theory;
        out.worst_theoretical_margin = std::min(margin, dual);
        out.theoretical_holds = margin >= -tol && dual >= -tol;
    }
    return out;
}

}  // namespace sdd
