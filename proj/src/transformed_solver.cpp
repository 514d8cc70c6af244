#include "sdd/transformed_solver.hpp"

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

// Delayed quantities read at s - h.
struct lagged {
    vec z;
    double alpha;
    double alpha_dot;
};

std::size_t node_index(const trajectory& traj, double s) {
    const auto nodes = traj.nodes();
    auto it = std::lower_bound(nodes.begin(), nodes.end(), s);
    std::size_t i = static_cast<std::size_t>(it - nodes.begin());
    if (i == nodes.size() || (i > 0 && std::abs(nodes[i - 1] - s) < std::abs(nodes[i] - s))) --i;
    if (std::abs(nodes[i] - s) > 1e-9 * (1 + std::abs(s))) {
        throw error(errc::step_mismatch, "point is not on the solution mesh");
    }
    return i;
}

}  // namespace

double transformed_denominator(double chi, const vec& z, const params& p) {
    return 1 + p.mu() * (chi - p.eta_bar()) - p.G(z);
}

double chi_rhs(double chi, const vec& z, double alpha_dot_lag, const params& p) {
    const double denom = transformed_denominator(chi, z, p);
    if (denom <= denominator_floor) {
        std::ostringstream msg;
        msg << "denominator 1 + mu (chi - eta_bar) - G(z) = " << denom << " vanished";
        throw error(errc::denominator_vanished, msg.str());
    }
    return (-p.mu() * (chi - p.eta_bar()) + p.G(z)) * alpha_dot_lag / denom;
}

transformed_solution integrate_transformed_from(const params& p, const transformed_state& state,
                                                double s_end, double ds) {
    if (!monotonicity_certificate(p)) {
        throw error(errc::certificate_required, "the transformed system needs 2 mu eta_bar < 1");
    }
    const double h = p.h();
    if (!(ds > 0) || !divides(h, ds)) throw error(errc::step_mismatch, "ds must divide h");
    if (!(s_end > state.s_start)) throw error(errc::invalid_params, "need s_end > s_start");
    if (state.z_history.dim() != p.dim() || state.alpha_history.dim() != 1) {
        throw error(errc::invalid_params, "transformed state has wrong dimensions");
    }

    const auto per_window = static_cast<std::size_t>(std::llround(h / ds));
    const auto steps = static_cast<std::size_t>(std::ceil((s_end - state.s_start) / ds - 1e-9));
    const double s_start = state.s_start;
    const auto node = [&](std::size_t n) {
        return s_start + (static_cast<double>(n) - static_cast<double>(per_window)) * ds;
    };
    const int m = p.dim();

    trajectory_builder zb(m);
    trajectory_builder ab(1);
    trajectory_builder cb(1);
    zb.reserve(per_window + steps + 1);
    ab.reserve(per_window + steps + 1);
    cb.reserve(steps + 1);
    for (std::size_t n = 0; n <= per_window; ++n) {
        const double s = n == 0 ? state.z_history.t_min() : n == per_window ? s_start : node(n);
        zb.push(s, state.z_history.eval(s), state.z_history.eval_derivative(s, side::left),
                state.z_history.eval_derivative(s, side::right));
        const double sa = n == 0 ? state.alpha_history.t_min() : s;
        ab.push(s, state.alpha_history.value(sa), state.alpha_history.slope(sa, 0, side::left),
                state.alpha_history.slope(sa, 0, side::right));
    }

    struct {
        double min_denominator = std::numeric_limits<double>::infinity();
        double max_denominator = -std::numeric_limits<double>::infinity();
        double chi_excursion = 0;
        double alpha_residual = 0;
        std::vector<double> alpha_jumps, z_jumps, chi_jumps;
    } out;

    const auto& zt = zb.view();
    const auto& at = ab.view();
    // Lag at node j of the mesh (s - h is node j - per_window).
    const auto lag_at_node = [&](std::size_t j, side sd) {
        return lagged{zt.node_value(j), at.node_value(j, 0), at.node_derivative(j, 0, sd)};
    };
    const auto lag_at_mid = [&](std::size_t seg) {
        const double s = std::midpoint(zt.nodes()[seg], zt.nodes()[seg + 1]);
        vec z(m);
        for (int c = 0; c < m; ++c) z[c] = zt.segment_value(seg, s, c);
        return lagged{z, at.segment_value(seg, s, 0), at.segment_slope(seg, s, 0)};
    };
    const auto rhs = [&](const vec& z, double chi, const lagged& lag, vec& dz, bool at_node) {
        const double denom = transformed_denominator(chi, z, p);
        if (at_node) {
            out.min_denominator = std::min(out.min_denominator, denom);
            out.max_denominator = std::max(out.max_denominator, denom);
        }
        const double dchi = chi_rhs(chi, z, lag.alpha_dot, p);
        dz = p.f(chi + lag.alpha, z, lag.z) * (lag.alpha_dot / denom);
        return dchi;
    };

    vec z = zt.node_value(per_window);
    double chi = state.chi0;
    cb.push(s_start, chi, 0.0, 0.0);

    for (std::size_t k = 0; k < steps; ++k) {
        const std::size_t n = per_window + k;  // node index of the step start
        const std::size_t lag0 = n - per_window;
        const lagged lag_lo = lag_at_node(lag0, side::right);
        const lagged lag_mid = lag_at_mid(lag0);
        const lagged lag_hi = lag_at_node(lag0 + 1, side::left);

        vec k1, k2, k3, k4, dz_end;
        const double c1 = rhs(z, chi, lag_lo, k1, true);
        const double c2 = rhs(z + ds / 2 * k1, chi + ds / 2 * c1, lag_mid, k2, false);
        const double c3 = rhs(z + ds / 2 * k2, chi + ds / 2 * c2, lag_mid, k3, false);
        const double c4 = rhs(z + ds * k3, chi + ds * c3, lag_hi, k4, false);
        const vec z_next = z + ds / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        const double chi_next = chi + ds / 6 * (c1 + 2 * c2 + 2 * c3 + c4);
        const double c_end = rhs(z_next, chi_next, lag_hi, dz_end, true);

        zb.set_tail_derivative(k1);
        cb.set_tail_derivative(vec::Constant(1, c1));
        ab.set_tail_derivative(vec::Constant(1, c1 + lag_lo.alpha_dot));

        const double s_next = node(n + 1);
        z = z_next;
        chi = chi_next;
        zb.push(s_next, z, dz_end, dz_end);
        cb.push(s_next, chi, c_end, c_end);
        const double a_end = c_end + lag_hi.alpha_dot;
        ab.push(s_next, chi + lag_hi.alpha, a_end, a_end);
    }

    trajectory z_curve = std::move(zb).finish();
    trajectory chi_curve = std::move(cb).finish();
    trajectory alpha_curve = std::move(ab).finish();

    const auto& ah = state.alpha_history;
    const double d0 = ah.slope(ah.t_max(), 0, side::left);
    const double compatibility =
        d0 * transformed_denominator(state.chi0, state.z_history.eval(ah.t_max(), side::left), p) -
        ah.slope(ah.t_min(), 0, side::right);

    for (std::size_t i = 0; i < chi_curve.node_count(); ++i) {
        const double c = chi_curve.node_value(i, 0);
        out.chi_excursion = std::max({out.chi_excursion, -c, c - h});
        const std::size_t n = per_window + i;
        out.alpha_residual = std::max(
            out.alpha_residual,
            std::abs(alpha_curve.node_value(n, 0) - c - alpha_curve.node_value(n - per_window, 0)));
    }
    for (std::size_t n = per_window; n < alpha_curve.node_count(); n += per_window) {
        out.alpha_jumps.push_back(std::abs(alpha_curve.node_derivative(n, 0, side::right) -
                                           alpha_curve.node_derivative(n, 0, side::left)));
        out.z_jumps.push_back(
            (z_curve.node_derivative(n, side::right) - z_curve.node_derivative(n, side::left)).norm());
        if (n > per_window) {
            const std::size_t ci = n - per_window;
            out.chi_jumps.push_back(std::abs(chi_curve.node_derivative(ci, 0, side::right) -
                                             chi_curve.node_derivative(ci, 0, side::left)));
        }
    }
    return transformed_solution{
        .z = std::move(z_curve),
        .chi = std::move(chi_curve),
        .alpha = time_map(monotone_fn(std::move(alpha_curve)), s_start, ah.value(ah.t_max()), h),
        .omega = omega_spec{.s0 = s_start, .omega = state.alpha_history, .d0 = d0},
        .model = p,
        .ds = ds,
        .min_denominator = out.min_denominator,
        .max_denominator = out.max_denominator,
        .chi_excursion = out.chi_excursion,
        .alpha_residual = out.alpha_residual,
        .compatibility = compatibility,
        .alpha_jumps = std::move(out.alpha_jumps),
        .z_jumps = std::move(out.z_jumps),
        .chi_jumps = std::move(out.chi_jumps)};
}

transformed_solution integrate_transformed(const params& p, const initial_data& init, const omega_spec& om,
                                           double horizon, double ds) {
    if (!monotonicity_certificate(p)) {
        throw error(errc::certificate_required, "the transformed system needs 2 mu eta_bar < 1");
    }
    validate(p, init);
    validate(om, p, init);
    const double h = p.h();
    if (!(ds > 0) || !divides(h, ds)) throw error(errc::step_mismatch, "ds must divide h");

    // z(s) = g(omega(s)) sampled on the s-mesh of the first window.
    const auto per_window = static_cast<std::size_t>(std::llround(h / ds));
    std::vector<double> nodes(per_window + 1);
    for (std::size_t n = 0; n <= per_window; ++n) {
        nodes[n] = om.s0 + (static_cast<double>(n) - static_cast<double>(per_window)) * ds;
    }
    nodes.front() = om.omega.t_min();
    nodes.back() = om.s0;
    const auto g_at = [&](double s) { return init.g.eval(om.omega.value(s)); };
    const auto g_slope = [&](double s) {
        return vec(init.g.eval_derivative(om.omega.value(s), side::left) * om.omega.slope(s));
    };
    const auto g_slope_right = [&](double s) {
        return vec(init.g.eval_derivative(om.omega.value(s), side::right) * om.omega.slope(s));
    };
    trajectory_builder zb(p.dim());
    for (double s : nodes) zb.push(s, g_at(s), g_slope(s), g_slope_right(s));

    transformed_state state{.s_start = om.s0,
                            .z_history = std::move(zb).finish(),
                            .alpha_history = om.omega,
                            .chi0 = init.eta0};
    transformed_solution out = integrate_transformed_from(p, state, om.s0 + horizon, ds);
    out.omega = om;
    return out;
}

transformed_state state_at(const transformed_solution& ts, double s) {
    const std::size_t i = node_index(ts.z, s);
    const auto per_window = static_cast<std::size_t>(std::llround(ts.model.h() / ts.ds));
    if (i < per_window) throw error(errc::out_of_domain, "restart point precedes s0");
    const std::size_t ci = node_index(ts.chi, ts.z.nodes()[i]);
    return transformed_state{.s_start = ts.z.nodes()[i],
                             .z_history = ts.z.slice(i - per_window, i),
                             .alpha_history = ts.alpha.curve().slice(i - per_window, i),
                             .chi0 = ts.chi.node_value(ci, 0)};
}

recovered_point recover_original(const transformed_solution& ts, double t) {
    const double s = ts.alpha.inverse(t);
    recovered_point out{ts.z.eval(s), std::nullopt};
    if (t >= ts.alpha.t0()) out.eta = ts.chi.value(std::max(s, ts.chi.t_min()));
    return out;
}

vec restore_initial_history(const transformed_solution& ts, double t) {
    const double lo = ts.alpha(ts.alpha.domain().lo);
    const double hi = ts.alpha.t0();
    const double slack = 1e-12 * (1 + std::abs(t));
    if (t < lo - slack || t > hi + slack) {
        throw error(errc::out_of_domain, "t outside [t0 - eta0, t0]");
    }
    const double s = ts.alpha.inverse(std::clamp(t, lo, hi));
    return ts.z.eval(std::min(s, ts.s0()), side::left);
}

restart_report process_restart_check(const params& p, const initial_data& init, const omega_spec& om,
                                     double s_mid, double horizon, double ds) {
    const double s_end = om.s0 + horizon;
    if (s_mid < om.s0 || s_mid >= s_end) throw error(errc::invalid_params, "need s0 <= s_mid < s0 + S");
    const transformed_solution direct = integrate_transformed(p, init, om, horizon, ds);
    const transformed_state state = s_mid - om.s0 < ds / 2
                                        ? state_at(direct, om.s0)
                                        : [&] {
                                              const transformed_solution first =
                                                  integrate_transformed(p, init, om, s_mid - om.s0, ds);
                                              return state_at(first, first.s_end());
                                          }();
    const transformed_solution resumed = integrate_transformed_from(p, state, s_end, ds);

    restart_report out{.distance = 0, .s_mid = state.s_start};
    for (std::size_t i = 0; i < resumed.chi.node_count(); ++i) {
        const double s = resumed.chi.nodes()[i];
        const double d = (resumed.z.eval(s) - direct.z.eval(s)).norm() +
                         std::abs(resumed.chi.value(s) - direct.chi.value(s)) +
                         std::abs(resumed.alpha(s) - direct.alpha(s));
        out.distance = std::max(out.distance, d);
    }
    return out;
}

}  // namespace sdd
