#include "sdd/sdd_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sdd/error.hpp"

namespace sdd {

namespace {

constexpr double overlap_tolerance = 1e-12;
constexpr int overlap_max_iterations = 10;
// Breaking points are followed through this many propagations of the delay.
constexpr int breaking_generations = 3;

std::size_t steps_for(double span, double step) {
    return static_cast<std::size_t>(std::ceil(span / step - 1e-9));
}

bool divides(double whole, double step) {
    const double ratio = whole / step;
    return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio);
}

}  // namespace

params::params(fields in) : in_(std::move(in)) {
    if (!(in_.mu > 0) || !(in_.eta_bar > 0)) {
        throw error(errc::invalid_params, "mu and eta_bar must be positive");
    }
    if (in_.dim <= 0) throw error(errc::invalid_params, "dimension must be positive");
    if (!in_.f || !in_.G) throw error(errc::invalid_params, "right-hand sides f and G are required");
    if (in_.lip_f < 0 || in_.lip_G < 0 || in_.g_sup < 0) {
        throw error(errc::invalid_params, "Lipschitz constants and sup|G| must be non-negative");
    }
    if (in_.g_sup > in_.mu * in_.eta_bar) {
        std::ostringstream msg;
        msg << "sup|G| = " << in_.g_sup << " exceeds mu * eta_bar = " << in_.mu * in_.eta_bar;
        throw error(errc::invalid_params, msg.str());
    }
}

void validate(const params& p, const initial_data& init) {
    const double h = p.h();
    if (init.g.empty() || init.g.dim() != p.dim()) {
        throw error(errc::invalid_params, "history dimension does not match the model");
    }
    const double slack = 1e-12 * (1 + std::abs(init.t0) + h);
    if (init.g.t_min() > init.t0 - h + slack || std::abs(init.g.t_max() - init.t0) > slack) {
        throw error(errc::invalid_params, "history must cover exactly [t0 - h, t0]");
    }
    if (!(init.eta0 >= 0) || init.eta0 > h) {
        throw error(errc::invalid_params, "eta0 must lie in [0, 2 eta_bar]");
    }
}

bool monotonicity_certificate(const params& p) noexcept { return 2 * p.mu() * p.eta_bar() < 1; }

double sigma_slope_bound(const params& p) noexcept { return 1 - 2 * p.mu() * p.eta_bar(); }

bool delay_floor_certificate(const params& p, double h1) {
    if (!(h1 > 0) || h1 > p.eta_bar()) {
        throw error(errc::invalid_h1, "h1 must lie in (0, eta_bar]");
    }
    return p.g_sup() <= p.mu() * (p.eta_bar() - h1);
}

sdd_solution integrate_sdd(const params& p, const initial_data& init, double t_end, double dt,
                           sdd_options options) {
    validate(p, init);
    const double h = p.h();
    const double t0 = init.t0;
    if (!(dt > 0) || !(t_end > t0)) throw error(errc::invalid_params, "need dt > 0 and T > t0");
    if (dt > p.eta_bar() / 4) throw error(errc::step_too_large, "dt must not exceed eta_bar / 4");
    if (!divides(h, dt)) throw error(errc::step_mismatch, "dt must divide h");
    const bool certified = monotonicity_certificate(p);
    if (options.require_sigma && !certified) {
        throw error(errc::certificate_required,
                    "deviating argument requested but 2 mu eta_bar < 1 does not hold");
    }

    const std::size_t steps = steps_for(t_end - t0, dt);
    const int m = p.dim();

    trajectory_builder ybuild(init.g);
    ybuild.reserve(init.g.node_count() + steps + 1);
    trajectory_builder ebuild(1);
    ebuild.reserve(steps + 1);

    const double lookup_floor = t0 - h;
    vec y = init.g.eval(t0, side::left);
    double eta = init.eta0;
    std::size_t overlap_steps = 0;
    ebuild.push(t0, eta, 0.0, 0.0);
    // Points where a derivative of y may jump, with the order of propagation.
    std::vector<std::pair<double, int>> breaks{{t0, 0}};
    std::optional<std::pair<double, int>> new_break;

    for (std::size_t n = 0; n < steps; ++n) {
        const double tn = t0 + static_cast<double>(n) * dt;
        const double tn1 = t0 + static_cast<double>(n + 1) * dt;
        const trajectory& past = ybuild.view();
        const std::size_t last_segment = past.segment_count() - 1;

        // In-step candidate: extrapolated previous segment, then the step's own cubic.
        bool have_step_cubic = false;
        vec cubic_y0 = y, cubic_y1, cubic_d0, cubic_d1;
        const auto in_step = [&](double s) {
            vec out(m);
            if (!have_step_cubic) {
                for (int c = 0; c < m; ++c) out[c] = past.segment_value(last_segment, s, c);
                return out;
            }
            const double u = (s - tn) / dt;
            const double u2 = u * u, u3 = u2 * u;
            out = (2 * u3 - 3 * u2 + 1) * cubic_y0 + (u3 - 2 * u2 + u) * dt * cubic_d0 +
                  (-2 * u3 + 3 * u2) * cubic_y1 + (u3 - u2) * dt * cubic_d1;
            return out;
        };

        bool used_in_step = false;
        const auto rhs = [&](double t, const vec& ys, double es, vec& dy) {
            double arg = t - es;
            vec delayed;
            if (arg <= tn) {
                if (arg < lookup_floor) {
                    if (arg < lookup_floor - 1e-9) {
                        throw error(errc::out_of_domain, "delayed argument below t0 - h");
                    }
                    arg = lookup_floor;
                }
                delayed = past.eval(arg);
            } else {
                used_in_step = true;
                delayed = in_step(arg);
            }
            dy = p.f(t, ys, delayed);
            return p.eta_rate(es, ys);
        };

        // One RK4 stage sequence from (ta, ya, ea) to tb.
        vec k1y, dend;
        double k1e = 0, eend = 0;
        const auto advance = [&](double ta, double tb, const vec& ya, double ea, vec& yb, double& eb, vec& d0y,
                                 double& d0e) {
            const double w = tb - ta;
            vec q2, q3, q4;
            d0e = rhs(ta, ya, ea, d0y);
            const double e2 = rhs(ta + w / 2, ya + w / 2 * d0y, ea + w / 2 * d0e, q2);
            const double e3 = rhs(ta + w / 2, ya + w / 2 * q2, ea + w / 2 * e2, q3);
            const double e4 = rhs(tb, ya + w * q3, ea + w * e3, q4);
            yb = ya + w / 6 * (d0y + 2 * q2 + 2 * q3 + q4);
            eb = ea + w / 6 * (d0e + 2 * e2 + 2 * e3 + e4);
        };

        vec y_next;
        double eta_next = 0;
        double split = tn;  // interior split point, tn when the step is not split
        vec previous_increment;
        bool settled = false;
        for (int it = 0; it < overlap_max_iterations; ++it) {
            used_in_step = false;
            if (split > tn) {
                vec y_mid, unused;
                double e_mid = 0, unused_e = 0;
                advance(tn, split, y, eta, y_mid, e_mid, k1y, k1e);
                advance(split, tn1, y_mid, e_mid, y_next, eta_next, unused, unused_e);
            } else {
                advance(tn, tn1, y, eta, y_next, eta_next, k1y, k1e);
            }
            const vec increment = y_next - y;
            eend = rhs(tn1, y_next, eta_next, dend);

            // The delayed argument crossing a breaking point inside the step
            // puts a kink in the integrand; the step is redone in two pieces.
            if (split == tn) {
                const auto sigma_at = [&](double t) {
                    const double u = (t - tn) / dt;
                    const double u2 = u * u, u3 = u2 * u;
                    return t - ((2 * u3 - 3 * u2 + 1) * eta + (u3 - 2 * u2 + u) * dt * k1e +
                                (-2 * u3 + 3 * u2) * eta_next + (u3 - u2) * dt * eend);
                };
                const double lo = tn - eta;
                const double hi = tn1 - eta_next;
                for (const auto& [b, generation] : breaks) {
                    if (b > tn || !((lo - b) * (hi - b) < 0)) continue;
                    double a = tn, z = tn1;
                    const bool rising = lo < b;
                    for (int k = 0; k < 100 && z - a > 1e-15 * (1 + std::abs(tn)); ++k) {
                        const double mid = 0.5 * (a + z);
                        ((sigma_at(mid) < b) == rising ? a : z) = mid;
                    }
                    split = 0.5 * (a + z);
                    if (generation + 1 < breaking_generations) new_break = {split, generation + 1};
                    break;
                }
                if (split > tn) {
                    --it;
                    continue;
                }
            }

            if (!used_in_step) {
                settled = true;
                break;
            }
            if (it > 0 && (increment - previous_increment).lpNorm<Eigen::Infinity>() < overlap_tolerance) {
                settled = true;
                break;
            }
            previous_increment = increment;
            have_step_cubic = true;
            cubic_y1 = y_next;
            cubic_d0 = k1y;
            cubic_d1 = dend;
        }
        if (!settled) {
            std::ostringstream msg;
            msg << "overlap iteration did not settle in step starting at t = " << tn;
            throw error(errc::iteration_diverged, msg.str());
        }
        if (new_break) {
            breaks.push_back(*new_break);
            new_break.reset();
        }
        if (have_step_cubic) ++overlap_steps;

        ybuild.set_tail_derivative(k1y);
        ebuild.set_tail_derivative(vec::Constant(1, k1e));
        y = y_next;
        eta = eta_next;
        ybuild.push(tn1, y, dend, dend);
        ebuild.push(tn1, eta, eend, eend);
    }

    sdd_solution sol{.y = std::move(ybuild).finish(),
                     .eta = std::move(ebuild).finish(),
                     .sigma = std::nullopt,
                     .model = p,
                     .initial = init,
                     .dt = dt,
                     .eta_excursion = 0,
                     .overlap_steps = overlap_steps};

    trajectory_builder sbuild(1);
    sbuild.reserve(sol.eta.node_count());
    for (std::size_t i = 0; i < sol.eta.node_count(); ++i) {
        const double t = sol.eta.nodes()[i];
        const double e = sol.eta.node_value(i, 0);
        sol.eta_excursion = std::max({sol.eta_excursion, -e, e - h});
        sbuild.push(t, t - e, 1 - sol.eta.node_derivative(i, 0, side::left),
                    1 - sol.eta.node_derivative(i, 0, side::right));
    }
    if (certified) sol.sigma.emplace(std::move(sbuild).finish());
    return sol;
}

namespace {

// Y on [t0 - h, T] from the history and node data on [t0, T].
trajectory join_history(const trajectory& g, const std::vector<double>& nodes,
                        const std::vector<vec>& values, const std::vector<vec>& derivs) {
    trajectory_builder b(g);
    b.set_tail_derivative(derivs.front());
    for (std::size_t j = 1; j < nodes.size(); ++j) b.push(nodes[j], values[j], derivs[j]);
    return std::move(b).finish();
}

double sup_distance(const std::vector<vec>& a, const std::vector<vec>& b, const std::vector<double>& ea,
                    const std::vector<double>& eb) {
    double worst = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        worst = std::max(worst, (a[j] - b[j]).norm() + std::abs(ea[j] - eb[j]));
    }
    return worst;
}

}  // namespace

picard_trace picard_iterate(const params& p, const initial_data& init, double t_end, int iters,
                            double dt) {
    validate(p, init);
    const double h = p.h();
    const double t0 = init.t0;
    if (iters < 1 || !(dt > 0)) throw error(errc::invalid_params, "need iters >= 1 and dt > 0");
    if (!(t_end > t0)) throw error(errc::invalid_params, "need T > t0");
    if (t_end - t0 > h * (1 + 1e-12)) {
        throw error(errc::horizon_too_long, "Picard oracle is restricted to T - t0 <= h");
    }
    const double fine = dt / 4;
    const std::size_t segments = steps_for(t_end - t0, fine);
    const std::vector<double> nodes = uniform_nodes(t0, t0 + static_cast<double>(segments) * fine, segments);
    const std::size_t n = nodes.size();
    const vec g0 = init.g.eval(t0, side::left);

    // Iterate 0: constant extension of the initial data.
    std::vector<vec> yv(n, g0), yd(n, vec::Zero(p.dim()));
    std::vector<double> ev(n, init.eta0), ed(n, 0.0);
    trajectory Y = join_history(init.g, nodes, yv, yd);
    trajectory E = trajectory::constant(t0, nodes.back(), vec::Constant(1, init.eta0));

    std::vector<double> increments;
    const double decay = std::exp(-p.mu() * fine);
    const double half_decay = std::exp(-p.mu() * fine / 2);
    const double floor = t0 - h;

    const auto integrand = [&](double s, vec& fy, double& gy) {
        const vec ys = Y.eval(s);
        const double arg = std::max(floor, s - E.value(s));
        fy = p.f(s, ys, Y.eval(arg));
        gy = p.G(ys);
    };

    for (int k = 1; k <= iters; ++k) {
        std::vector<vec> fy_node(n), fy_mid(n);
        std::vector<double> g_node(n), g_mid(n);
        for (std::size_t j = 0; j < n; ++j) {
            integrand(nodes[j], fy_node[j], g_node[j]);
            if (j + 1 < n) integrand(std::midpoint(nodes[j], nodes[j + 1]), fy_mid[j], g_mid[j]);
        }
        std::vector<vec> ynew(n), ydnew(n);
        std::vector<double> enew(n), ednew(n);
        ynew[0] = g0;
        enew[0] = init.eta0;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double w = nodes[j + 1] - nodes[j];
            ynew[j + 1] = ynew[j] + w / 6 * (fy_node[j] + 4 * fy_mid[j] + fy_node[j + 1]);
            const double gint =
                w / 6 * (decay * g_node[j] + 4 * half_decay * g_mid[j] + g_node[j + 1]);
            enew[j + 1] = p.eta_bar() + decay * (enew[j] - p.eta_bar()) + gint;
        }
        for (std::size_t j = 0; j < n; ++j) {
            ydnew[j] = fy_node[j];
            ednew[j] = -p.mu() * (enew[j] - p.eta_bar()) + g_node[j];
        }
        increments.push_back(sup_distance(ynew, yv, enew, ev));
        yv = std::move(ynew);
        yd = std::move(ydnew);
        ev = std::move(enew);
        ed = std::move(ednew);
        Y = join_history(init.g, nodes, yv, yd);
        trajectory_builder eb(1);
        eb.reserve(n);
        for (std::size_t j = 0; j < n; ++j) eb.push(nodes[j], ev[j], ed[j], ed[j]);
        E = std::move(eb).finish();
    }

    double excursion = 0;
    for (double e : ev) excursion = std::max({excursion, -e, e - h});
    return picard_trace{.iterate = sdd_solution{.y = std::move(Y),
                                 .eta = std::move(E),
                                 .sigma = std::nullopt,
                                 .model = p,
                                 .initial = init,
                                 .dt = fine,
                                 .eta_excursion = excursion,
                                 .overlap_steps = 0},
                        .increments = std::move(increments)};
}

sdd_solution picard_oracle(const params& p, const initial_data& init, double t_end, int iters, double dt) {
    return picard_iterate(p, init, t_end, iters, dt).iterate;
}

double deviating_argument(const sdd_solution& sol, double t) {
    if (!sol.eta.contains(t)) throw error(errc::out_of_domain, "deviating argument outside [t0, T]");
    return t - sol.eta.value(t);
}

double sigma_inverse(const sdd_solution& sol, double tau) {
    if (!sol.sigma) {
        throw error(errc::certificate_required, "sigma is not invertible without 2 mu eta_bar < 1");
    }
    const interval dom = sol.sigma->domain();
    const interval bracket{std::max(tau, dom.lo), std::min(tau + sol.model.h(), dom.hi)};
    if (!(bracket.lo <= bracket.hi)) throw error(errc::bracket_invalid, "tau outside range of sigma");
    return invert_monotone(*sol.sigma, tau, bracket);
}

double lipschitz_estimate_y(const sdd_solution& sol) { return sol.y.max_abs_derivative_at_nodes(); }

lipschitz_diagnostic diagnose_lipschitz(const sdd_solution& sol, std::size_t samples) {
    lipschitz_diagnostic out;
    const auto nodes = sol.eta.nodes();
    const std::size_t n = nodes.size();
    if (n < 2 || samples == 0) return out;
    const std::size_t stride = std::max<std::size_t>(1, n / samples);
    const auto state = [&](std::size_t i) {
        const double t = nodes[i];
        const vec y = sol.y.eval(t);
        const vec yd = sol.y.eval(std::max(sol.y.t_min(), t - sol.eta.node_value(i, 0)));
        return std::pair{y, yd};
    };
    for (std::size_t i = 0; i + stride < n; i += stride) {
        const auto [ya, yda] = state(i);
        const auto [yb, ydb] = state(i + stride);
        const double t = nodes[i];
        const double dist = (ya - yb).norm() + (yda - ydb).norm();
        if (dist > 1e-10) {
            const double df = (sol.model.f(t, ya, yda) - sol.model.f(t, yb, ydb)).norm();
            out.observed_f = std::max(out.observed_f, df / dist);
        }
        const double dy = (ya - yb).norm();
        if (dy > 1e-10) {
            out.observed_G = std::max(out.observed_G, std::abs(sol.model.G(ya) - sol.model.G(yb)) / dy);
        }
    }
    out.f_consistent = out.observed_f <= sol.model.lip_f() * (1 + 1e-9);
    out.G_consistent = out.observed_G <= sol.model.lip_G() * (1 + 1e-9);
    return out;
}

}  // namespace sdd
