#include "sdd/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdd/error.hpp"

namespace sdd {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::vector<double> grid_over(double lo, double hi, std::size_t points) {
    return uniform_nodes(lo, hi, std::max<std::size_t>(points, 2) - 1);
}

trajectory shifted(const trajectory& traj, double shift) {
    trajectory_builder b(traj.dim());
    b.reserve(traj.node_count());
    for (std::size_t i = 0; i < traj.node_count(); ++i) {
        b.push(traj.nodes()[i], vec(traj.node_value(i).array() + shift), traj.node_derivative(i, side::left),
               traj.node_derivative(i, side::right));
    }
    return std::move(b).finish();
}

}  // namespace

// ---------------------------------------------------------------------------
// report

const check_result& verification_report::check(std::string name, std::string claim, double value, relation rel,
                                               double threshold) {
    if (claim.empty()) throw error(errc::unanchored_check, "check '" + name + "' does not state its claim");
    const bool pass = rel == relation::at_most ? value <= threshold : value >= threshold;
    checks_.push_back({std::move(name), std::move(claim), value, rel, threshold, pass && std::isfinite(value)});
    return checks_.back();
}

const check_result& verification_report::require(std::string name, std::string claim, bool holds) {
    return check(std::move(name), std::move(claim), holds ? 1.0 : 0.0, relation::at_least, 1.0);
}

void verification_report::note(std::string name, std::string claim, double value) {
    if (claim.empty()) throw error(errc::unanchored_check, "metric '" + name + "' does not state its claim");
    metrics_.push_back({std::move(name), std::move(claim), value});
}

void verification_report::merge(const verification_report& other) {
    checks_.insert(checks_.end(), other.checks_.begin(), other.checks_.end());
    metrics_.insert(metrics_.end(), other.metrics_.begin(), other.metrics_.end());
    if (columns_.empty()) {
        columns_ = other.columns_;
        rows_ = other.rows_;
    }
}

void verification_report::set_table(std::vector<std::string> columns, std::vector<std::vector<double>> rows) {
    columns_ = std::move(columns);
    rows_ = std::move(rows);
}

bool verification_report::all_pass() const noexcept {
    return std::all_of(checks_.begin(), checks_.end(), [](const check_result& c) { return c.pass; });
}

const check_result* verification_report::find(std::string_view name) const {
    for (const auto& c : checks_) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

nlohmann::json verification_report::to_json() const {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : checks_) {
        checks.push_back({{"name", c.name},
                          {"claim", c.claim},
                          {"value", c.value},
                          {"relation", c.rel == relation::at_most ? "<=" : ">="},
                          {"threshold", c.threshold},
                          {"pass", c.pass}});
    }
    nlohmann::json metrics = nlohmann::json::array();
    for (const auto& m : metrics_) metrics.push_back({{"name", m.name}, {"claim", m.claim}, {"value", m.value}});
    nlohmann::json out{{"scenario", scenario_},
                       {"pass", all_pass()},
                       {"runtime_seconds", runtime_},
                       {"checks", checks},
                       {"metrics", metrics}};
    if (!columns_.empty()) out["table"] = {{"columns", columns_}, {"rows", rows_}};
    return out;
}

// ---------------------------------------------------------------------------
// equivalence of the two systems

verification_report verify_equivalence(const sdd_solution& sdd, const transformed_solution& ts, std::size_t grid) {
    const double s0 = ts.s0();
    const double s_end = ts.s_end();
    const double t_top = ts.alpha(s_end);
    const double slack = 1e-9 * (1 + std::abs(t_top));
    if (t_top > sdd.t_end() + slack || std::abs(ts.alpha.t0() - sdd.t0()) > slack) {
        throw error(errc::horizon_mismatch, "the SDD solution does not cover alpha([s0, s0 + S])");
    }
    double z_gap = 0, chi_gap = 0, y_gap = 0;
    for (double s : grid_over(s0, s_end, grid)) {
        const double t = std::min(ts.alpha(s), sdd.t_end());
        z_gap = std::max(z_gap, (ts.z.eval(s) - sdd.y.eval(t)).norm());
        chi_gap = std::max(chi_gap, std::abs(ts.chi.value(s) - sdd.eta.value(t)));
    }
    for (double t : grid_over(sdd.t0(), std::min(t_top, sdd.t_end()), grid)) {
        y_gap = std::max(y_gap, (sdd.y.eval(t) - ts.z.eval(ts.alpha.inverse(t))).norm());
    }
    verification_report report("equivalence");
    report.check("z_equals_y_of_alpha", "z(s) = y(alpha(s)) on [s0, s0 + S]", z_gap, relation::at_most,
                 equivalence_tolerance);
    report.check("chi_equals_eta_of_alpha", "chi(s) = eta(alpha(s)) on [s0, s0 + S]", chi_gap, relation::at_most,
                 equivalence_tolerance);
    report.check("y_equals_z_of_alpha_inverse", "y(t) = z(alpha^{-1}(t)) on [t0, alpha(s0 + S)]", y_gap,
                 relation::at_most, equivalence_tolerance);
    return report;
}

transformed_solution corrupt_alpha(const transformed_solution& ts, double shift) {
    transformed_solution out = ts;
    out.alpha = time_map(monotone_fn(shifted(ts.alpha.curve(), shift)), ts.alpha.s0(), ts.alpha.t0(),
                         ts.alpha.h());
    return out;
}

// ---------------------------------------------------------------------------
// continuous dependence on initial data

initial_data perturbed_initial(const initial_data& base, const params& p, double delta, double dt) {
    const double h = p.h();
    const auto segments = static_cast<std::size_t>(std::llround(h / dt));
    const std::vector<double> nodes = uniform_nodes(base.t0 - h, base.t0, std::max<std::size_t>(segments, 1));
    const double t0 = base.t0;
    trajectory_builder b(p.dim());
    b.reserve(nodes.size());
    for (double t : nodes) {
        const vec value = base.g.eval(t).array() + delta * (1 + std::cos(t - t0));
        const double bump_slope = -delta * std::sin(t - t0);
        b.push(t, value, vec(base.g.eval_derivative(t, side::left).array() + bump_slope),
               vec(base.g.eval_derivative(t, side::right).array() + bump_slope));
    }
    initial_data out{.g = std::move(b).finish(), .eta0 = base.eta0 + delta, .t0 = t0};
    if (out.eta0 > h) out.eta0 = base.eta0 - delta;
    return out;
}

std::vector<dependence_row> continuous_dependence_rows(const params& p, const initial_data& base,
                                                       const std::vector<double>& deltas, double t_end, double dt) {
    const initial_data reference = perturbed_initial(base, p, 0.0, dt);
    const sdd_solution bar = integrate_sdd(p, reference, t_end, dt);
    const double lip_y = lipschitz_estimate_y(bar);
    const double rate = std::max(2 * p.lip_f() + p.lip_G(), lip_y);
    const double span = bar.t_end() - bar.t0();

    std::vector<dependence_row> rows;
    for (double delta : deltas) {
        const initial_data pert = perturbed_initial(base, p, delta, dt);
        const sdd_solution sol = integrate_sdd(p, pert, t_end, dt);
        dependence_row row{.delta = delta};
        for (std::size_t i = 0; i < reference.g.node_count(); ++i) {
            row.g_shift = std::max(row.g_shift, (pert.g.node_value(i) - reference.g.node_value(i)).norm());
        }
        row.eta_shift = std::abs(pert.eta0 - reference.eta0);
        const std::size_t first = bar.y.node_count() - bar.eta.node_count();
        for (std::size_t i = 0; i < bar.eta.node_count(); ++i) {
            const double dy = (sol.y.node_value(first + i) - bar.y.node_value(first + i)).norm();
            const double de = std::abs(sol.eta.node_value(i, 0) - bar.eta.node_value(i, 0));
            row.observed = std::max(row.observed, dy + de);
        }
        row.bound = ((1 + p.lip_f()) * row.g_shift + row.eta_shift) * std::exp(span * rate);
        rows.push_back(row);
    }
    return rows;
}

namespace {

// Consecutive ratios within a factor 2 of the ratios of the perturbation sizes.
void check_linear_scaling(verification_report& report, const std::string& prefix, const std::vector<double>& deltas,
                          const std::vector<double>& observed, const std::string& claim) {
    for (std::size_t i = 0; i + 1 < deltas.size(); ++i) {
        if (deltas[i + 1] <= 0 || observed[i + 1] <= 0) continue;
        const double expected = deltas[i] / deltas[i + 1];
        const double ratio = observed[i] / observed[i + 1];
        const double skew = std::max(ratio / expected, expected / ratio);
        report.check(prefix + "_scaling_" + std::to_string(i), claim, skew, relation::at_most, 2.0);
    }
}

}  // namespace

verification_report continuous_dependence_experiment(const params& p, const initial_data& base,
                                                     const std::vector<double>& deltas, double t_end, double dt) {
    const auto rows = continuous_dependence_rows(p, base, deltas, t_end, dt);
    verification_report report("continuous_dependence");
    std::vector<std::vector<double>> table;
    std::vector<double> observed;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        report.check("gronwall_bound_" + std::to_string(i),
                     "sup(|dy| + |deta|) <= {(1 + L_f) sup|dg| + |deta0|} exp(T max{2 L_f + L_G, L_y})",
                     r.observed - r.bound, relation::at_most, 0.0);
        observed.push_back(r.observed);
        table.push_back({r.delta, r.observed, r.bound, r.g_shift, r.eta_shift});
    }
    check_linear_scaling(report, "dependence", deltas, observed, "sup(|dy| + |deta|) scales linearly with delta");
    report.set_table({"delta", "observed", "bound", "g_shift", "eta0_shift"}, std::move(table));
    return report;
}

// ---------------------------------------------------------------------------
// convergence of the time transformation

std::vector<alpha_convergence_row> alpha_convergence_rows(const params& p, const initial_data& base, double s0,
                                                          double d0, const std::vector<double>& deltas,
                                                          double horizon, double ds) {
    const double h = p.h();
    const double t_end = base.t0 + horizon + 2 * h;
    const double dt = ds;
    const auto build = [&](const initial_data& init) {
        const sdd_solution sol = integrate_sdd(p, init, t_end, dt, {.require_sigma = true});
        const omega_spec om = default_omega(init, p, s0, d0);
        return std::pair{build_alpha(sol, om, horizon, ds), om.omega.min_derivative()};
    };
    const initial_data reference = perturbed_initial(base, p, 0.0, dt);
    const time_map bar = build(reference).first;
    const std::size_t first = static_cast<std::size_t>(std::llround(h / ds));
    const double windows = std::ceil(horizon / h - 1e-9);

    std::vector<alpha_convergence_row> rows;
    for (double delta : deltas) {
        const auto [alpha, omega_floor] = build(perturbed_initial(base, p, delta, dt));
        alpha_convergence_row row{.delta = delta};
        for (std::size_t i = first; i < bar.curve().node_count(); ++i) {
            row.distance = std::max(row.distance, std::abs(alpha.curve().node_value(i, 0) - bar.curve().node_value(i, 0)));
        }
        row.min_slope = alpha.curve().min_derivative();
        row.recursion_floor = omega_floor / std::pow(1 + 2 * p.mu() * p.eta_bar(), windows);
        rows.push_back(row);
    }
    return rows;
}

verification_report alpha_convergence_experiment(const params& p, const initial_data& base, double s0, double d0,
                                                  const std::vector<double>& deltas, double horizon, double ds) {
    const auto rows = alpha_convergence_rows(p, base, s0, d0, deltas, horizon, ds);
    verification_report report("alpha_convergence");
    std::vector<std::vector<double>> table;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        report.check("alpha_slope_positive_" + std::to_string(i), "alpha_n'(s) > 0 on [s0 - h, s0 + S]", r.min_slope,
                     relation::at_least, std::numeric_limits<double>::min());
        report.check("alpha_slope_recursion_" + std::to_string(i),
                     "alpha_n' >= min omega_n' / (1 + 2 mu eta_bar)^windows", r.min_slope - r.recursion_floor,
                     relation::at_least, -1e-9);
        if (i > 0) {
            report.check("alpha_distance_decreases_" + std::to_string(i),
                         "max |alpha_n - alpha_bar| decreases as the data converge",
                         r.distance - rows[i - 1].distance, relation::at_most, 0.0);
        }
        table.push_back({r.delta, r.distance, r.min_slope, r.recursion_floor});
    }
    report.set_table({"delta", "alpha_distance", "min_alpha_slope", "recursion_floor"}, std::move(table));
    return report;
}

// ---------------------------------------------------------------------------
// exponential stability transfer

rate_fit fit_decay_rate(const trajectory& x, double from) {
    const double to = x.t_max();
    const double start = from + (to - from) / 2;
    std::vector<double> ts, logs;
    double previous = inf;
    for (std::size_t i = 0; i < x.node_count(); ++i) {
        const double t = x.nodes()[i];
        if (t < start) continue;
        const double norm = x.node_value(i).norm();
        if (!(norm > 0) || norm >= previous) {
            throw error(errc::not_decaying, "tail norm is not decreasing");
        }
        previous = norm;
        ts.push_back(t);
        logs.push_back(std::log(norm));
    }
    if (ts.size() < 3) throw error(errc::not_decaying, "too few tail points to fit a rate");
    const auto n = static_cast<double>(ts.size());
    double mt = 0, ml = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        mt += ts[i];
        ml += logs[i];
    }
    mt /= n;
    ml /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        sxy += (ts[i] - mt) * (logs[i] - ml);
        sxx += (ts[i] - mt) * (ts[i] - mt);
        syy += (logs[i] - ml) * (logs[i] - ml);
    }
    const double slope = sxy / sxx;
    rate_fit fit{.rate = -slope, .intercept = ml - slope * mt, .r_squared = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0};
    if (!(fit.rate > 0)) throw error(errc::not_decaying, "fitted decay rate is not positive");
    return fit;
}

stability_summary stability_summary_of(const sdd_solution& sdd, const transformed_solution& ts) {
    stability_summary out;
    const std::size_t history = sdd.y.node_count() - sdd.eta.node_count();
    out.t_rate = fit_decay_rate(sdd.y.slice(history, sdd.y.node_count() - 1), sdd.t0());
    const std::size_t zfirst = ts.z.node_count() - ts.chi.node_count();
    out.s_rate = fit_decay_rate(ts.z.slice(zfirst, ts.z.node_count() - 1), ts.s0());

    const double s0 = ts.s0();
    const double t0 = ts.alpha.t0();
    out.alpha_slope = (ts.alpha(ts.s_end()) - t0) / (ts.s_end() - s0);

    // Test rates at half the fitted ones keep a margin; the feasible rates are
    // the largest values making each condition hold on the mesh.
    const double d1 = out.s_rate.rate;
    const double d2 = out.t_rate.rate / 2;
    const double c1 = out.t_rate.rate;
    const double c2 = out.s_rate.rate / 2;
    out.max_t_condition = -inf;
    out.max_s_condition = -inf;
    out.feasible_t_rate = inf;
    out.feasible_s_rate = inf;
    const trajectory& curve = ts.alpha.curve();
    for (std::size_t i = 0; i < curve.node_count(); ++i) {
        const double s = curve.nodes()[i];
        if (s < s0) continue;
        const double t = curve.node_value(i, 0);
        out.max_t_condition = std::max(out.max_t_condition, d2 * (t - t0) - d1 * (s - s0));
        out.max_s_condition = std::max(out.max_s_condition, c2 * (s - s0) - c1 * (t - t0));
        if (s > s0) {
            out.feasible_t_rate = std::min(out.feasible_t_rate, d1 * (s - s0) / (t - t0));
            out.feasible_s_rate = std::min(out.feasible_s_rate, c1 * (t - t0) / (s - s0));
        }
    }
    return out;
}

verification_report stability_transfer_check(const sdd_solution& sdd, const transformed_solution& ts) {
    const stability_summary st = stability_summary_of(sdd, ts);
    verification_report report("stability_transfer");
    report.check("t_rate_fit_quality", "log|y(t)| is affine on the tail (R^2)", st.t_rate.r_squared,
                 relation::at_least, rate_fit_min_r_squared);
    report.check("s_rate_fit_quality", "log|z(s)| is affine on the tail (R^2)", st.s_rate.r_squared,
                 relation::at_least, rate_fit_min_r_squared);
    report.check("rate_ratio_matches_alpha_slope", "s-rate / t-rate = mean slope of alpha (relative error)",
                 std::abs(st.s_rate.rate / st.t_rate.rate - st.alpha_slope) / st.alpha_slope, relation::at_most, 0.05);
    report.check("t_condition", "D2 (t - t0) - D1 (alpha^{-1}(t) - s0) <= 0", st.max_t_condition, relation::at_most,
                 0.0);
    report.check("s_condition", "C2 (s - s0) - C1 (alpha(s) - t0) <= 0", st.max_s_condition, relation::at_most, 0.0);
    report.note("t_rate", "decay rate of y in t", st.t_rate.rate);
    report.note("s_rate", "decay rate of z in s", st.s_rate.rate);
    report.note("feasible_t_rate", "largest D2 with D2 (t - t0) <= D1 (alpha^{-1}(t) - s0)", st.feasible_t_rate);
    report.note("feasible_s_rate", "largest C2 with C2 (s - s0) <= C1 (alpha(s) - t0)", st.feasible_s_rate);
    return report;
}

// ---------------------------------------------------------------------------
// finite-horizon estimates for the assumptions on alpha

assumption_estimates estimate_assumptions(const time_map& map, double horizon) {
    const trajectory& curve = map.curve();
    const double s0 = map.s0();
    const double s_end = std::min(s0 + horizon, curve.t_max());
    const std::size_t first = static_cast<std::size_t>(
        std::lower_bound(curve.nodes().begin(), curve.nodes().end(), s0 - 1e-12 * (1 + std::abs(s0))) -
        curve.nodes().begin());
    std::size_t last = first;
    while (last + 1 < curve.node_count() && curve.nodes()[last + 1] <= s_end + 1e-12 * (1 + std::abs(s_end))) ++last;
    const trajectory part = curve.slice(first, last);

    assumption_estimates out;
    out.sup_alpha_slope = part.max_derivative();
    out.sup_inverse_slope = 1 / part.min_derivative();

    const double t_lo = part.node_value(0, 0);
    const double t_hi = part.node_value(part.node_count() - 1, 0);
    const std::vector<double> tgrid = grid_over(t_lo, t_hi, 2001);
    const double eps = 1e-4 * (t_hi - t_lo);
    out.inf_inverse_slope_fd = inf;
    for (double t : tgrid) {
        if (t - eps < t_lo || t + eps > t_hi) continue;
        const double fd = (map.inverse(t + eps) - map.inverse(t - eps)) / (2 * eps);
        out.inf_inverse_slope_fd = std::min(out.inf_inverse_slope_fd, fd);
    }

    out.growth_offset = part.node_value(0, 0) - out.sup_alpha_slope * s0;
    out.growth_margin = inf;
    for (std::size_t i = 0; i < part.node_count(); ++i) {
        const double s = part.nodes()[i];
        out.growth_margin = std::min(out.growth_margin, out.sup_alpha_slope * s + out.growth_offset - part.node_value(i, 0));
    }

    for (int k = 0; k <= 8; ++k) {
        const double gap = map.h() / std::ldexp(1.0, k);
        out.gaps.push_back(gap);
        double ma = 0, mad = 0, mi = 0, mid = 0;
        for (std::size_t i = 0; i < part.node_count(); ++i) {
            const double s = part.nodes()[i];
            if (s + gap > part.t_max()) break;
            ma = std::max(ma, std::abs(part.value(s + gap) - part.value(s)));
            mad = std::max(mad, std::abs(part.slope(s + gap) - part.slope(s)));
        }
        for (double t : tgrid) {
            if (t + gap > t_hi) break;
            const double a = map.inverse(t);
            const double b = map.inverse(t + gap);
            mi = std::max(mi, b - a);
            mid = std::max(mid, std::abs(1 / map.derivative(b) - 1 / map.derivative(a)));
        }
        out.modulus_alpha.push_back(ma);
        out.modulus_alpha_slope.push_back(mad);
        out.modulus_inverse.push_back(mi);
        out.modulus_inverse_slope.push_back(mid);
    }
    return out;
}

verification_report alpha_regularity_report(const time_map& map, double horizon) {
    const assumption_estimates est = estimate_assumptions(map, horizon);
    verification_report report("assumption_estimates");
    report.note("C1_alpha", "sup alpha'(s) over the horizon (bounded slope of alpha)", est.sup_alpha_slope);
    report.note("C2_alpha", "sup (alpha^{-1})'(t) over the horizon (bounded slope of the inverse)",
                est.sup_inverse_slope);
    report.check("chain_rule", "sup alpha' * inf (alpha^{-1})' >= 1", est.sup_alpha_slope * est.inf_inverse_slope_fd,
                 relation::at_least, 1 - 1e-6);
    report.check("linear_growth", "alpha(s) <= C1 s + k1 on the mesh", est.growth_margin, relation::at_least,
                 -bound_tolerance);
    std::vector<std::vector<double>> table;
    for (std::size_t k = 0; k < est.gaps.size(); ++k) {
        table.push_back({est.gaps[k], est.modulus_alpha[k], est.modulus_inverse[k], est.modulus_alpha_slope[k],
                         est.modulus_inverse_slope[k]});
    }
    report.set_table({"gap", "modulus_alpha", "modulus_alpha_inverse", "modulus_alpha_slope",
                      "modulus_alpha_inverse_slope"},
                     std::move(table));
    return report;
}

// ---------------------------------------------------------------------------
// solution manifold

double manifold_residual(const params& p, const initial_data& init) {
    const double t0 = init.t0;
    const vec slope = init.g.eval_derivative(t0, side::left);
    const vec value = init.g.eval(t0, side::left);
    return (slope - p.f(t0, value, init.g.eval(t0 - init.eta0))).norm();
}

double manifold_residual_at(const sdd_solution& sol, double t) {
    const vec slope = sol.y.eval_derivative(t, side::left);
    const double eta = sol.eta.value(t, 0, side::left);
    return (slope - sol.model.f(t, sol.y.eval(t), sol.y.eval(t - eta))).norm();
}

verification_report boundedness_transfer_check(const sdd_solution& sdd, const transformed_solution& ts, double t1) {
    const double s1 = ts.alpha.inverse(t1);
    double sup_z = 0, sup_y_s = 0;
    const trajectory& curve = ts.alpha.curve();
    for (std::size_t i = 0; i < curve.node_count(); ++i) {
        const double s = curve.nodes()[i];
        if (s < s1) continue;
        sup_z = std::max(sup_z, ts.z.eval(s).norm());
        sup_y_s = std::max(sup_y_s, sdd.y.eval(std::min(curve.node_value(i, 0), sdd.t_end())).norm());
    }
    double sup_y = 0, sup_z_t = 0;
    const double t_top = std::min(ts.alpha(ts.s_end()), sdd.t_end());
    for (std::size_t i = 0; i < sdd.y.node_count(); ++i) {
        const double t = sdd.y.nodes()[i];
        if (t < t1 || t > t_top) continue;
        sup_y = std::max(sup_y, sdd.y.node_value(i).norm());
        sup_z_t = std::max(sup_z_t, ts.z.eval(ts.alpha.inverse(t)).norm());
    }
    verification_report report("boundedness_transfer");
    report.check("bounded_s_mesh", "sup_{s >= s1} |z(s)| = sup |y(alpha(s))|", std::abs(sup_z - sup_y_s),
                 relation::at_most, equivalence_tolerance);
    report.check("bounded_t_mesh", "sup_{t >= t1} |y(t)| = sup |z(alpha^{-1}(t))|", std::abs(sup_y - sup_z_t),
                 relation::at_most, equivalence_tolerance);
    report.note("sup_y", "sup |y| on [t1, T]", sup_y);
    return report;
}

// ---------------------------------------------------------------------------
// step-halving order

order_result sdd_convergence_order(const params& p, const initial_data& init, double t_end, double dt) {
    const sdd_solution coarse = integrate_sdd(p, init, t_end, dt);
    const sdd_solution fine = integrate_sdd(p, init, t_end, dt / 2);
    const sdd_solution ref = integrate_sdd(p, init, t_end, dt / 8);
    const auto error_of = [&](const sdd_solution& sol) {
        double worst = 0;
        for (std::size_t i = 0; i < coarse.eta.node_count(); ++i) {
            const double t = coarse.eta.nodes()[i];
            worst = std::max(worst, (sol.y.eval(t) - ref.y.eval(t)).norm() + std::abs(sol.eta.value(t) - ref.eta.value(t)));
        }
        return worst;
    };
    order_result out{.error_coarse = error_of(coarse), .error_fine = error_of(fine)};
    out.ratio = out.error_coarse / out.error_fine;
    return out;
}

order_result transformed_convergence_order(const params& p, const initial_data& init, const omega_spec& om,
                                           double horizon, double ds) {
    const transformed_solution coarse = integrate_transformed(p, init, om, horizon, ds);
    const transformed_solution fine = integrate_transformed(p, init, om, horizon, ds / 2);
    const transformed_solution ref = integrate_transformed(p, init, om, horizon, ds / 8);
    const auto error_of = [&](const transformed_solution& sol) {
        double worst = 0;
        for (std::size_t i = 0; i < coarse.chi.node_count(); ++i) {
            const double s = coarse.chi.nodes()[i];
            worst = std::max(worst, (sol.z.eval(s) - ref.z.eval(s)).norm() + std::abs(sol.chi.value(s) - ref.chi.value(s)));
        }
        return worst;
    };
    order_result out{.error_coarse = error_of(coarse), .error_fine = error_of(fine)};
    out.ratio = out.error_coarse / out.error_fine;
    return out;
}

}  // namespace sdd
