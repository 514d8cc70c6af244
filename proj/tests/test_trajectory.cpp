#include <doctest.h>

#include <cmath>
#include <cstring>
#include <functional>
#include <random>

#include "checks.hpp"
#include "scenarios.hpp"
#include "sdd/error.hpp"
#include "sdd/monotone.hpp"
#include "sdd/sdd_solver.hpp"
#include "sdd/trajectory.hpp"

using namespace sdd;
using namespace sdd::testing;

namespace {

trajectory cubic_on(const std::vector<double>& nodes, double c3, double c2, double c1, double c0) {
    return trajectory::sample(
        nodes, [&](double t) { return scalar(((c3 * t + c2) * t + c1) * t + c0); },
        [&](double t) { return scalar((3 * c3 * t + 2 * c2) * t + c1); });
}

}  // namespace

TEST_CASE("constant trajectory") {
    const trajectory g = trajectory::constant(-2, 0, scalar(1));
    CHECK(g.value(-0.7) == 1.0);
    CHECK(g.slope(-0.7) == 0.0);
    CHECK(g.slope(-2) == 0.0);
    CHECK(g.domain().lo == -2);
    CHECK(g.domain().hi == 0);
}

TEST_CASE("cubic sampled with exact derivatives is reproduced") {
    const trajectory p = cubic_on({0, 0.5, 1}, 1, 0, -1, 0);
    CHECK(p.value(0.25) == doctest::Approx(-0.234375).epsilon(1e-15));
    CHECK(p.slope(0.25) == doctest::Approx(-0.8125).epsilon(1e-15));
}

TEST_CASE("RK4 output of y' = -y is accurate between nodes") {
    const params p = scalar_model(0.4, 1.0, 1.0, 0.0, 0.0);
    const sdd_solution sol = integrate_sdd(p, constant_history(1.0, 1.0, 2.0), 1.0, 0.01);
    CHECK(std::abs(sol.y.value(0.5) - std::exp(-0.5)) <= 1e-8);
    CHECK(std::abs(sol.y.value(0.5037) - std::exp(-0.5037)) <= 1e-8);
    CHECK(std::abs(sol.y.slope(0.5) + std::exp(-0.5)) <= 1e-6);
    const double fd = (sol.y.value(0.5 + 1e-5) - sol.y.value(0.5 - 1e-5)) / 2e-5;
    CHECK(std::abs(sol.y.slope(0.5) - fd) <= 1e-6);
}

TEST_CASE("evaluation outside the domain is an error") {
    const trajectory g = trajectory::constant(-2, 0, scalar(1));
    CHECK(code_of([&] { (void)g.eval(0.1); }) == errc::out_of_domain);
    CHECK(code_of([&] { (void)g.eval_derivative(-2.5); }) == errc::out_of_domain);
    CHECK(code_of([&] { (void)g.value(std::nan("")); }) == errc::out_of_domain);
}

TEST_CASE("nodes are exact and kinks keep both one-sided derivatives") {
    trajectory_builder b(1);
    b.push(0.0, 0.0, 1.0, 1.0);
    b.push(1.0, 1.0, 1.0, -2.0);
    b.push(2.0, -1.0, -2.0, -2.0);
    const trajectory k = std::move(b).finish();
    CHECK(k.value(1.0) == 1.0);
    CHECK(k.value(1.0, 0, side::left) == 1.0);
    CHECK(k.slope(1.0) == -2.0);
    CHECK(k.slope(1.0, 0, side::left) == 1.0);
    CHECK(k.value(1.5) == doctest::Approx(0.0));
}

TEST_CASE("builder rejects non-increasing times and wrong dimensions") {
    trajectory_builder b(2);
    b.push(0.0, vec::Zero(2), vec::Zero(2));
    CHECK(code_of([&] { b.push(0.0, vec::Zero(2), vec::Zero(2)); }) == errc::invalid_params);
    CHECK(code_of([&] { b.push(1.0, vec::Zero(1), vec::Zero(1)); }) == errc::invalid_params);
}

TEST_CASE("property: random cubics are reproduced on random node sets") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> coef(-3, 3);
    std::uniform_real_distribution<double> gap(0.05, 0.8);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> nodes{coef(rng)};
        const int count = 2 + trial % 6;
        for (int i = 1; i < count; ++i) nodes.push_back(nodes.back() + gap(rng));
        const double c3 = coef(rng), c2 = coef(rng), c1 = coef(rng), c0 = coef(rng);
        const trajectory p = cubic_on(nodes, c3, c2, c1, c0);
        std::uniform_real_distribution<double> where(nodes.front(), nodes.back());
        for (int k = 0; k < 20; ++k) {
            const double t = where(rng);
            const double exact = ((c3 * t + c2) * t + c1) * t + c0;
            const double slope = (3 * c3 * t + 2 * c2) * t + c1;
            REQUIRE(std::abs(p.value(t) - exact) <= 1e-12 * (1 + std::abs(exact)));
            REQUIRE(std::abs(p.slope(t) - slope) <= 1e-11 * (1 + std::abs(slope)));
        }
    }
}

TEST_CASE("property: evaluation is deterministic") {
    const trajectory p = cubic_on(uniform_nodes(0, 3, 17), 0.3, -1.1, 0.7, 2.0);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> where(0, 3);
    for (int k = 0; k < 500; ++k) {
        const double t = where(rng);
        const double a = p.value(t);
        const double b = p.value(t);
        REQUIRE(std::memcmp(&a, &b, sizeof a) == 0);
    }
}

TEST_CASE("exact derivative extrema match a dense scan") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 50; ++trial) {
        trajectory_builder b(1);
        for (int i = 0; i <= 5; ++i) b.push(0.3 * i, u(rng), u(rng), u(rng));
        const trajectory p = std::move(b).finish();
        double lo = 1e300, hi = -1e300;
        for (std::size_t i = 0; i + 1 < p.node_count(); ++i) {
            for (double t : uniform_nodes(p.nodes()[i], p.nodes()[i + 1], 4000)) {
                const double d = p.segment_slope(i, t, 0);
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
        }
        CHECK(p.min_derivative() <= lo + 1e-12);
        CHECK(p.min_derivative() >= lo - 1e-6);
        CHECK(p.max_derivative() >= hi - 1e-12);
        CHECK(p.max_derivative() <= hi + 1e-6);
    }
}

TEST_CASE("slice keeps nodes verbatim") {
    const trajectory p = cubic_on(uniform_nodes(0, 1, 10), 1, 0, 0, 0);
    const trajectory s = p.slice(3, 7);
    CHECK(s.node_count() == 5);
    CHECK(s.t_min() == p.nodes()[3]);
    CHECK(s.value(0.5) == p.value(0.5));
    CHECK(code_of([&] { (void)p.slice(4, 4); }) == errc::out_of_domain);
}

TEST_CASE("invert_monotone on an affine deviating argument") {
    const monotone_fn sigma(cubic_on({0, 10}, 0, 0, 1, -1));
    CHECK(invert_monotone(sigma, 3, {3, 5}) == doctest::Approx(4).epsilon(1e-14));
    CHECK(code_of([&] { (void)invert_monotone(sigma, 6, {3, 5}); }) == errc::bracket_invalid);
}

TEST_CASE("invert_monotone on t - 1 + exp(-0.4 t)") {
    const auto value = [](double t) { return scalar(t - 1 + std::exp(-0.4 * t)); };
    const auto slope = [](double t) { return scalar(1 - 0.4 * std::exp(-0.4 * t)); };
    const monotone_fn sigma(trajectory::sample(uniform_nodes(0, 2, 200), value, slope));
    CHECK(std::abs(invert_monotone(sigma, 0, {0, 2})) <= 1e-12);
    const auto fn = [&](double t) { return sigma(t); };
    const double oracle = bisect_increasing(fn, 1, {0, 2});
    const double newton = invert_monotone(sigma, 1, {0, 2});
    CHECK(std::abs(newton - oracle) <= 1e-10);
    CHECK(std::abs(sigma(newton) - 1) <= inversion_tolerance);
}

TEST_CASE("monotone_fn rejects a non-increasing trajectory") {
    CHECK(code_of([] { (void)monotone_fn(cubic_on({0, 1, 2}, 0, 1, -1, 0)); }) == errc::non_monotone);
}

TEST_CASE("property: inversion round trip on random increasing functions") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> slope(0.1, 3.0);
    std::uniform_real_distribution<double> gap(0.05, 0.5);
    for (int trial = 0; trial < 100; ++trial) {
        // Secant equal to the mean end slope makes each segment derivative
        // linear, so it never drops below the smallest node slope.
        std::vector<double> d(12);
        for (double& x : d) x = slope(rng);
        trajectory_builder b(1);
        double t = 0, v = 0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            b.push(t, v, d[i], d[i]);
            if (i + 1 == d.size()) break;
            const double w = gap(rng);
            t += w;
            v += w * (d[i] + d[i + 1]) / 2;
        }
        const monotone_fn fn(std::move(b).finish());
        REQUIRE(fn.slope_floor() > 0);
        std::uniform_real_distribution<double> target(fn.range().lo, fn.range().hi);
        for (int k = 0; k < 20; ++k) {
            const double y = target(rng);
            REQUIRE(std::abs(fn(invert_monotone(fn, y)) - y) <= 1e-10);
        }
    }
}
