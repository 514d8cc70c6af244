#pragma once

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "sdd/error.hpp"
#include "sdd/trajectory.hpp"

namespace sdd {

inline constexpr double inversion_tolerance = 1e-12;
inline constexpr int inversion_max_iterations = 200;

// Scalar trajectory with a certified positive lower bound on its derivative.
class monotone_fn {
   public:
    monotone_fn() = default;

    // Throws errc::non_monotone unless the exact minimum derivative is positive.
    explicit monotone_fn(trajectory fn);

    [[nodiscard]] const trajectory& underlying() const noexcept { return fn_; }
    [[nodiscard]] double slope_floor() const noexcept { return slope_floor_; }
    [[nodiscard]] interval domain() const { return fn_.domain(); }
    [[nodiscard]] interval range() const { return {fn_.node_value(0, 0), fn_.node_value(fn_.node_count() - 1, 0)}; }

    [[nodiscard]] double operator()(double t, side s = side::right) const { return fn_.value(t, 0, s); }
    [[nodiscard]] double derivative(double t, side s = side::right) const { return fn_.slope(t, 0, s); }

   private:
    trajectory fn_;
    double slope_floor_ = 0;
};

// Solves fn(t) = target for increasing fn on [bracket.lo, bracket.hi].
//
// Newton iteration started at the bracket midpoint. Every evaluation shrinks
// the bracket; a Newton step that would leave it is replaced by bisection.
template <typename Value, typename Slope>
double safeguarded_newton(Value&& fn, Slope&& slope, double target, interval bracket,
                          double tol = inversion_tolerance, int max_iter = inversion_max_iterations) {
    double lo = bracket.lo;
    double hi = bracket.hi;
    const double r_lo = fn(lo) - target;
    const double r_hi = fn(hi) - target;
    if (std::abs(r_lo) <= tol) return lo;
    if (std::abs(r_hi) <= tol) return hi;
    if (!(lo < hi) || r_lo > 0 || r_hi < 0) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "target " << target << " not bracketed by [" << lo << ", " << hi << "] (values "
            << r_lo + target << ", " << r_hi + target << ")";
        throw error(errc::bracket_invalid, msg.str());
    }

    double x = std::midpoint(lo, hi);
    for (int iter = 0; iter < max_iter; ++iter) {
        const double r = fn(x) - target;
        if (std::abs(r) <= tol) return x;
        if (r < 0) {
            lo = x;
        } else {
            hi = x;
        }
        const double width_floor = 4 * std::numeric_limits<double>::epsilon() *
                                   std::max({1.0, std::abs(lo), std::abs(hi)});
        if (hi - lo <= width_floor) return x;

        const double d = slope(x);
        double next = d > 0 ? x - r / d : std::numeric_limits<double>::quiet_NaN();
        if (!(next > lo && next < hi)) next = std::midpoint(lo, hi);
        x = next;
    }
    throw error(errc::no_convergence, "safeguarded Newton did not converge");
}

double invert_monotone(const monotone_fn& fn, double target, interval bracket);

// Inversion with a bracket narrowed to the containing segment first.
double invert_monotone(const monotone_fn& fn, double target);

// Plain bisection; kept as an independent reference for tests and oracles.
template <typename Value>
double bisect_increasing(Value&& fn, double target, interval bracket, int iterations = 200) {
    double lo = bracket.lo;
    double hi = bracket.hi;
    for (int i = 0; i < iterations && hi - lo > 0; ++i) {
        const double mid = std::midpoint(lo, hi);
        if (mid == lo || mid == hi) break;
        if (fn(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return std::midpoint(lo, hi);
}

}  // namespace sdd
