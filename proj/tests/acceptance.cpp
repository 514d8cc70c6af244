// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

#include "scenarios.hpp"
#include "sdd/error.hpp"
#include "sdd/transformed_solver.hpp"
#include "sdd/verifier.hpp"

using namespace sdd;
using namespace sdd::testing;

namespace {

struct outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<outcome()>& body) {
    outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(3);
    s << x;
    return s.str();
}


outcome round_trip_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    const params p = s1_model();
    const initial_data init = s1_initial();
    const double S = 5 * p.h();
    const sdd_solution sol = integrate_sdd(p, init, init.t0 + S + p.h(), 1e-3, {.require_sigma = true});
    const transformed_solution ts = integrate_transformed(p, init, default_omega(init, p, 0.0, s1_d0), S, 1e-3);
    const verification_report r = verify_equivalence(sol, ts);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double z_gap = r.find("z_equals_y_of_alpha")->value;
    const double chi_gap = r.find("chi_equals_eta_of_alpha")->value;
    return {z_gap <= 1e-5 && chi_gap <= 1e-5 && seconds < 5,
            "sup|z - y(alpha)| = " + fmt(z_gap) + ", sup|chi - eta(alpha)| = " + fmt(chi_gap) + ", runtime " +
                fmt(seconds) + " s"};
}

outcome delay_invariant() {
    double worst = 0;
    for (const auto& e : catalog()) {
        const sdd_solution sol = integrate_sdd(e.model, e.init, 20.0, 1e-3);
        worst = std::max(worst, sol.eta_excursion);
    }
    return {worst <= 1e-9, "20 models, worst excursion of eta outside [0, 2 eta_bar] = " + fmt(worst)};
}

outcome monotonicity_certificate_holds() {
    double worst = std::numeric_limits<double>::infinity();
    int certified = 0;
    for (const auto& e : catalog()) {
        if (!monotonicity_certificate(e.model)) continue;
        ++certified;
        const sdd_solution sol = integrate_sdd(e.model, e.init, 20.0, 1e-3);
        const trajectory& sigma = sol.sigma->underlying();
        for (std::size_t i = 0; i < sigma.node_count(); ++i) {
            for (side sd : {side::left, side::right}) {
                worst = std::min(worst, sigma.node_derivative(i, 0, sd) - sigma_slope_bound(e.model));
            }
        }
    }
    return {certified > 0 && worst >= -1e-6,
            std::to_string(certified) + " certified models, min sigma' - (1 - 2 mu eta_bar) = " + fmt(worst)};
}

outcome alpha_bounds() {
    double upper = std::numeric_limits<double>::infinity();
    double lower = upper;
    int maps = 0, floors = 0;
    for (const auto& e : catalog()) {
        if (!monotonicity_certificate(e.model)) continue;
        const double S = 5 * e.model.h();
        const sdd_solution sol = integrate_sdd(e.model, e.init, e.init.t0 + S + e.model.h(), 1e-3, {.require_sigma = true});
        const time_map map = build_alpha(sol, default_omega(e.init, e.model, 0.0, e.d0), S, 1e-3);
        std::optional<double> h1;
        if (e.h1 && delay_floor_certificate(e.model, *e.h1) && e.init.eta0 >= *e.h1) h1 = e.h1;
        const alpha_bounds_report b = alpha_bounds_check(map, h1);
        ++maps;
        upper = std::min(upper, b.upper.worst_margin);
        if (b.lower.evaluated) {
            ++floors;
            lower = std::min(lower, b.lower.worst_margin);
        }
    }
    return {maps > 0 && floors > 0 && upper >= -1e-9 && lower >= -1e-9,
            std::to_string(maps) + " maps, upper margin " + fmt(upper) + "; " + std::to_string(floors) +
                " with a delay floor, lower margin " + fmt(lower)};
}

outcome constant_delay_degeneration() {
    const params p = scalar_model(0.4, 1.0, 0.0, 1.0, 0.0);
    const initial_data init = s1_initial();
    const double S = 10 * p.h();
    const sdd_solution sol = integrate_sdd(p, init, init.t0 + S + p.h(), 1e-3, {.require_sigma = true});
    const time_map map = build_alpha(sol, default_omega(init, p, 0.0, 0.5), S, 1e-3);
    double worst = 0;
    for (double s : uniform_nodes(-p.h(), S, 120000)) worst = std::max(worst, std::abs(map(s) - s / 2));
    return {worst <= 1e-8, "sup|alpha(s) - (t0 + (s - s0) / 2)| over S = 10h: " + fmt(worst)};
}

outcome gronwall_bound() {
    const std::vector<double> deltas{1e-2, 1e-3, 1e-4};
    const auto rows = continuous_dependence_rows(s1_model(), s1_initial(), deltas, 2.0, 1e-3);
    bool below = true;
    std::string detail;
    for (const auto& r : rows) {
        below = below && r.observed <= r.bound;
        detail += "delta " + fmt(r.delta) + ": " + fmt(r.observed) + " <= " + fmt(r.bound) + "; ";
    }
    bool linear = true;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const double ratio = rows[i].observed / rows[i + 1].observed;
        const double expected = rows[i].delta / rows[i + 1].delta;
        linear = linear && ratio >= expected / 2 && ratio <= expected * 2;
        detail += "ratio " + fmt(ratio) + "; ";
    }
    return {below && linear, detail};
}

outcome alpha_convergence() {
    const std::vector<double> deltas{1e-2, 1e-3, 1e-4};
    const params p = s1_model();
    const auto rows = alpha_convergence_rows(p, s1_initial(), 0.0, s1_d0, deltas, 5 * p.h(), 1e-3);
    bool decreasing = true, positive = true;
    std::string detail;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        positive = positive && rows[i].min_slope > 0;
        if (i > 0) decreasing = decreasing && rows[i].distance < rows[i - 1].distance;
        detail += "delta " + fmt(rows[i].delta) + ": dist " + fmt(rows[i].distance) + ", min alpha' " +
                  fmt(rows[i].min_slope) + "; ";
    }
    return {decreasing && positive, detail};
}

outcome picard_agreement() {
    const params p = s1_model();
    const initial_data init = s1_initial();
    const double t_end = init.t0 + p.h();
    const sdd_solution rk = integrate_sdd(p, init, t_end, 1e-3);
    const sdd_solution pic = picard_oracle(p, init, t_end, 12, 1e-3);
    double worst = 0;
    for (double t : rk.eta.nodes()) {
        worst = std::max(worst, (rk.y.eval(t) - pic.y.eval(t)).norm() + std::abs(rk.eta.value(t) - pic.eta.value(t)));
    }
    return {worst <= 1e-6, "sup(|y_rk - y_picard| + |eta_rk - eta_picard|) on [t0, t0 + h] = " + fmt(worst)};
}

outcome process_property() {
    const params p = s1_model();
    const initial_data init = s1_initial();
    const omega_spec om = default_omega(init, p, 0.0, s1_d0);
    double worst = 0;
    for (double s_mid : {0.0, 1.0, 3.7, 5.0}) {
        worst = std::max(worst, process_restart_check(p, init, om, s_mid, 5 * p.h(), 1e-3).distance);
    }
    return {worst <= 1e-8, "restart at s_mid in {0, 1, 3.7, 5}: sup distance " + fmt(worst)};
}

outcome stability_transfer() {
    // y' = -0.5 y, G = 0, eta0 = eta_bar, so alpha(s) = s / 2.
    const params p = scalar_model(0.4, 1.0, 0.5, 0.0, 0.0);
    const initial_data init = s1_initial();
    const double S = 10 * p.h();
    const sdd_solution sol = integrate_sdd(p, init, init.t0 + S + p.h(), 1e-3, {.require_sigma = true});
    const transformed_solution ts = integrate_transformed(p, init, default_omega(init, p, 0.0, 0.5), S, 1e-3);
    const stability_summary st = stability_summary_of(sol, ts);
    const double ratio = st.s_rate.rate / st.t_rate.rate;
    const bool fit_ok = st.t_rate.r_squared >= 0.99 && st.s_rate.r_squared >= 0.99;
    return {fit_ok && std::abs(ratio - 0.5) <= 0.025,
            "rate in t " + fmt(st.t_rate.rate) + ", rate in s " + fmt(st.s_rate.rate) + ", s/t ratio " + fmt(ratio) +
                ", R^2 " + fmt(std::min(st.t_rate.r_squared, st.s_rate.r_squared))};
}

outcome convergence_order() {
    // Constant delay with exact exponential data: y = exp(lambda t) with
    // lambda = -a - b exp(-lambda eta_bar) keeps the manifold residual at zero.
    const double a = 1.0, b = -0.2;
    const params p = scalar_model(0.4, 1.0, a, b, 0.0);
    const double lambda = characteristic_root(a, -b, 1.0, -5.0, 0.0);
    const initial_data init = sampled_history([&](double t) { return std::exp(lambda * t); },
                                              [&](double t) { return lambda * std::exp(lambda * t); }, 1.0, 2.0,
                                              1e-3);
    const order_result sdd_order = sdd_convergence_order(p, init, 10.0, 0.05);

    // State-dependent delay on data that lies on the solution manifold.
    const params q = s1_model();
    const double eta0 = 0.3;
    const double lam = characteristic_root(0.0, -1.0, eta0, -5.0, 0.0);
    const initial_data on_manifold = sampled_history([&](double t) { return std::exp(lam * t); },
                                                     [&](double t) { return lam * std::exp(lam * t); }, eta0, 2.0,
                                                     1e-3);
    const order_result sdd_order_2 = sdd_convergence_order(q, on_manifold, 10.0, 0.05);
    const order_result ts_order =
        transformed_convergence_order(q, on_manifold, default_omega(on_manifold, q, 0.0, eta0 / 2), 10.0, 0.05);
    const double residual = manifold_residual(q, on_manifold);
    const auto in_band = [](double r) { return r >= 10 && r <= 22; };
    return {in_band(sdd_order.ratio) && in_band(sdd_order_2.ratio) && in_band(ts_order.ratio),
            "constant delay " + fmt(sdd_order.ratio) + ", state-dependent " + fmt(sdd_order_2.ratio) +
                ", transformed " + fmt(ts_order.ratio) + " (manifold residual " + fmt(residual) + ")"};
}

}  // namespace

int main() {
    report(1, "round-trip equivalence", round_trip_equivalence);
    report(2, "delay invariant", delay_invariant);
    report(3, "monotonicity certificate", monotonicity_certificate_holds);
    report(4, "time-equivalence bounds", alpha_bounds);
    report(5, "constant-delay degeneration", constant_delay_degeneration);
    report(6, "Gronwall bound", gronwall_bound);
    report(7, "alpha convergence", alpha_convergence);
    report(8, "Picard oracle agreement", picard_agreement);
    report(9, "process property", process_property);
    report(10, "stability transfer", stability_transfer);
    report(11, "convergence order", convergence_order);
    return failures == 0 ? 0 : 1;
}
