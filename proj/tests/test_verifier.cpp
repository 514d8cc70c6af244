#include <doctest.h>

#include <cmath>

#include "checks.hpp"
#include "scenarios.hpp"
#include "sdd/verifier.hpp"

using namespace sdd;
using namespace sdd::testing;

namespace {

struct pair_run {
    sdd_solution sol;
    transformed_solution ts;
};

pair_run run_pair(const params& p, const initial_data& init, double d0, double S, double extra = 0) {
    const double ds = 1e-3;
    return {integrate_sdd(p, init, init.t0 + S + p.h() + extra, ds, {.require_sigma = true}),
            integrate_transformed(p, init, default_omega(init, p, 0, d0), S, ds)};
}

params equilibrium_model() { return scalar_model(0.4, 1.0, 0.0, 0.0, 0.0); }

double hermite(double s, double s0, double s1, double v0, double v1, double d0, double d1) {
    const double w = s1 - s0;
    const double u = (s - s0) / w;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
    const double h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u);
    const double h11 = u * u * (u - 1);
    return h00 * v0 + h10 * w * d0 + h01 * v1 + h11 * w * d1;
}

}  // namespace

TEST_CASE("report bookkeeping") {
    verification_report r("demo");
    CHECK(code_of([&] { (void)r.check("gap", "", 0.1, relation::at_most, 1); }) == errc::unanchored_check);
    CHECK(code_of([&] { (void)r.require("flag", "", true); }) == errc::unanchored_check);
    CHECK(code_of([&] { r.note("m", "", 1); }) == errc::unanchored_check);
    CHECK(r.check("small", "x <= 1", 0.5, relation::at_most, 1).pass);
    CHECK_FALSE(r.check("large", "x >= 1", 0.5, relation::at_least, 1).pass);
    CHECK(r.require("holds", "it holds", true).pass);
    r.note("count", "a number", 3);
    CHECK_FALSE(r.all_pass());
    REQUIRE(r.find("small") != nullptr);
    CHECK(r.find("missing") == nullptr);

    const nlohmann::json j = r.to_json();
    CHECK(j["scenario"] == "demo");
    CHECK(j["pass"] == false);
    CHECK(j["checks"].size() == 3);
    CHECK(j["checks"][1]["relation"] == ">=");
    CHECK(j["metrics"][0]["value"] == 3.0);
    CHECK_FALSE(j.contains("table"));
    r.set_table({"a", "b"}, {{1, 2}});
    CHECK(r.to_json()["table"]["columns"][1] == "b");
}

TEST_CASE("equivalence of the two systems") {
    SUBCASE("equilibrium is reproduced to rounding") {
        const pair_run run = run_pair(equilibrium_model(), s1_initial(), 0.5, 10);
        const verification_report r = verify_equivalence(run.sol, run.ts);
        CHECK(r.all_pass());
        for (const auto& c : r.checks()) CHECK(c.value <= 1e-12);
    }
    SUBCASE("S1") {
        const pair_run run = run_pair(s1_model(), s1_initial(), s1_d0, 10);
        const verification_report r = verify_equivalence(run.sol, run.ts);
        CHECK(r.all_pass());
        for (const auto& c : r.checks()) CHECK(c.value <= 1e-5);
    }
    SUBCASE("a shifted alpha is caught") {
        const pair_run run = run_pair(s1_model(), s1_initial(), s1_d0, 10);
        const verification_report r = verify_equivalence(run.sol, corrupt_alpha(run.ts, 0.01));
        CHECK_FALSE(r.all_pass());
        CHECK(r.find("z_equals_y_of_alpha")->value > 1e-3);
    }
    SUBCASE("a solution that stops early is a horizon mismatch") {
        const pair_run run = run_pair(s1_model(), s1_initial(), s1_d0, 10);
        const sdd_solution short_sol = integrate_sdd(s1_model(), s1_initial(), 3, 1e-3);
        CHECK(code_of([&] { (void)verify_equivalence(short_sol, run.ts); }) == errc::horizon_mismatch);
    }
}

TEST_CASE("perturbed initial data") {
    const initial_data g = perturbed_initial(s1_initial(), s1_model(), 0.01, 1e-3);
    CHECK(g.g.value(0) == doctest::Approx(1.02));
    CHECK(g.g.value(-1) == doctest::Approx(1 + 0.01 * (1 + std::cos(1.0))));
    CHECK(g.g.slope(-1) == doctest::Approx(0.01 * std::sin(1.0)));
    CHECK(g.eta0 == doctest::Approx(1.01));
    // eta0 + delta past h flips to eta0 - delta.
    CHECK(perturbed_initial(constant_history(1, 2, 2), s1_model(), 0.01, 1e-3).eta0 == doctest::Approx(1.99));
}

TEST_CASE("continuous dependence") {
    SUBCASE("delta = 0 gives identical solutions") {
        const auto rows = continuous_dependence_rows(s1_model(), s1_initial(), {0.0}, 2, 1e-3);
        CHECK(rows[0].observed == 0.0);
    }
    SUBCASE("observed gaps stay under the bound and scale with delta") {
        const std::vector<double> deltas{1e-2, 1e-3, 1e-4};
        const auto rows = continuous_dependence_rows(s1_model(), s1_initial(), deltas, 2, 1e-3);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            CHECK(rows[i].observed <= rows[i].bound);
            CHECK(rows[i].g_shift == doctest::Approx(2 * deltas[i]));
            CHECK(rows[i].eta_shift == doctest::Approx(deltas[i]));
        }
        for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
            const double ratio = rows[i].observed / rows[i + 1].observed;
            CHECK(ratio >= 5);
            CHECK(ratio <= 20);
        }
        CHECK(continuous_dependence_experiment(s1_model(), s1_initial(), deltas, 2).all_pass());
    }
}

TEST_CASE("alpha convergence") {
    SUBCASE("delta = 0 reproduces alpha_bar") {
        const auto rows = alpha_convergence_rows(s1_model(), s1_initial(), 0, s1_d0, {0.0}, 4, 1e-3);
        CHECK(rows[0].distance == 0.0);
    }
    SUBCASE("first window against a closed-form oracle") {
        // G = 0: eta(t) = 1 + delta exp(-0.4 t), alpha_bar(s) = s / 2, and on
        // [0, h] alpha solves alpha - eta(alpha) = omega_delta(s - h).
        const params p = scalar_model(0.4, 1.0, 0.0, 1.0, 0.0);
        const double delta = 0.05;
        const auto rows = alpha_convergence_rows(p, s1_initial(), 0, 0.5, {delta}, 2, 1e-3);
        const double eta0 = 1 + delta;
        const double factor = 1 + 0.4 * delta;
        double worst = 0;
        for (double s : uniform_nodes(0, 2, 200)) {
            const double target = hermite(s - 2, -2, 0, -eta0, 0, 0.5 * factor, 0.5);
            const auto sigma = [&](double t) { return t - (1 + delta * std::exp(-0.4 * t)); };
            const double a = bisect_increasing(sigma, target, {0, 4});
            worst = std::max(worst, std::abs(a - s / 2));
        }
        CHECK(rows[0].distance == doctest::Approx(worst).epsilon(1e-4));
        CHECK(rows[0].min_slope >= rows[0].recursion_floor);
    }
    SUBCASE("experiment report") {
        const verification_report r =
            alpha_convergence_experiment(s1_model(), s1_initial(), 0, s1_d0, {1e-2, 1e-3, 1e-4}, 10);
        CHECK(r.all_pass());
        CHECK(r.find("alpha_distance_decreases_1") != nullptr);
    }
}

TEST_CASE("decay-rate fit") {
    const auto nodes = uniform_nodes(0, 10, 1000);
    const trajectory decay = trajectory::sample(
        nodes, [](double t) { return scalar(3 * std::exp(-0.7 * t)); },
        [](double t) { return scalar(-2.1 * std::exp(-0.7 * t)); });
    const rate_fit fit = fit_decay_rate(decay, 0);
    CHECK(fit.rate == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(fit.intercept == doctest::Approx(std::log(3)).epsilon(1e-10));
    CHECK(fit.r_squared == doctest::Approx(1).epsilon(1e-12));
    const trajectory growth = trajectory::sample(
        nodes, [](double t) { return scalar(std::exp(0.1 * t)); }, [](double t) { return scalar(0.1 * std::exp(0.1 * t)); });
    CHECK(code_of([&] { (void)fit_decay_rate(growth, 0); }) == errc::not_decaying);
}

TEST_CASE("stability transfer") {
    SUBCASE("y' = -0.5 y decays at half the rate in s") {
        const pair_run run = run_pair(scalar_model(0.4, 1.0, 0.5, 0.0, 0.0), s1_initial(), 0.5, 20);
        const stability_summary st = stability_summary_of(run.sol, run.ts);
        CHECK(st.t_rate.rate == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(st.s_rate.rate == doctest::Approx(0.25).epsilon(1e-6));
        CHECK(st.alpha_slope == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(st.max_t_condition <= 1e-12);
        CHECK(st.max_s_condition <= 1e-12);
        CHECK(stability_transfer_check(run.sol, run.ts).all_pass());
    }
    SUBCASE("a growing solution is reported as not decaying") {
        const pair_run run = run_pair(scalar_model(0.4, 1.0, -0.1, 0.0, 0.0), s1_initial(), 0.5, 10);
        CHECK(code_of([&] { (void)stability_summary_of(run.sol, run.ts); }) == errc::not_decaying);
    }
}

TEST_CASE("assumption estimates") {
    SUBCASE("alpha(s) = s / 2") {
        const pair_run run = run_pair(equilibrium_model(), s1_initial(), 0.5, 10);
        const assumption_estimates est = estimate_assumptions(run.ts.alpha, 10);
        CHECK(est.sup_alpha_slope == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(est.sup_inverse_slope == doctest::Approx(2).epsilon(1e-9));
        CHECK(est.inf_inverse_slope_fd == doctest::Approx(2).epsilon(1e-6));
        CHECK(std::abs(est.growth_offset) <= 1e-12);
        REQUIRE(est.gaps.size() == 9);
        for (std::size_t k = 0; k < est.gaps.size(); ++k) {
            CHECK(est.modulus_alpha[k] == doctest::Approx(est.gaps[k] / 2).epsilon(1e-8));
            CHECK(est.modulus_inverse[k] == doctest::Approx(2 * est.gaps[k]).epsilon(1e-8));
            CHECK(est.modulus_alpha_slope[k] <= 1e-9);
            CHECK(est.modulus_inverse_slope[k] <= 1e-8);
        }
    }
    SUBCASE("S1") {
        const pair_run run = run_pair(s1_model(), s1_initial(), s1_d0, 10);
        const verification_report r = alpha_regularity_report(run.ts.alpha, 10);
        CHECK(r.all_pass());
        CHECK(r.find("chain_rule")->value >= 1 - 1e-6);
        CHECK(r.rows().size() == 9);
        const assumption_estimates est = estimate_assumptions(run.ts.alpha, 10);
        for (std::size_t k = 0; k + 1 < est.gaps.size(); ++k) {
            CHECK(est.modulus_alpha[k + 1] <= est.modulus_alpha[k]);
        }
    }
}

TEST_CASE("solution manifold residual") {
    // g = 1 with f = -y(t - eta): g'(t0) = 0 while f = -1.
    CHECK(manifold_residual(s1_model(), s1_initial()) == doctest::Approx(1));
    const double eta0 = 0.3;
    const double lambda = characteristic_root(0.0, -1.0, eta0, -5.0, 0.0);
    const initial_data on = sampled_history([&](double t) { return std::exp(lambda * t); },
                                            [&](double t) { return lambda * std::exp(lambda * t); }, eta0, 2.0, 1e-3);
    CHECK(manifold_residual(s1_model(), on) <= 1e-10);
    const sdd_solution sol = integrate_sdd(s1_model(), s1_initial(), 6, 1e-3);
    for (double t : {1.0, 2.5, 5.0}) CHECK(manifold_residual_at(sol, t) <= 1e-6);
}

TEST_CASE("boundedness transfers between time scales") {
    const pair_run run = run_pair(s1_model(), s1_initial(), s1_d0, 10);
    const verification_report r = boundedness_transfer_check(run.sol, run.ts, 2);
    CHECK(r.all_pass());
    CHECK(r.metrics()[0].value > 0);
}
