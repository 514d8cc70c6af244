#include "sdd/monotone.hpp"

#include <algorithm>

namespace sdd {

std::string_view to_string(errc code) noexcept {
    switch (code) {
        case errc::out_of_domain: return "OutOfDomain";
        case errc::bracket_invalid: return "BracketInvalid";
        case errc::no_convergence: return "NoConvergence";
        case errc::invalid_params: return "InvalidParams";
        case errc::invalid_h1: return "InvalidH1";
        case errc::certificate_required: return "CertificateRequired";
        case errc::step_too_large: return "StepTooLarge";
        case errc::step_mismatch: return "StepMismatch";
        case errc::iteration_diverged: return "IterationDiverged";
        case errc::horizon_too_long: return "HorizonTooLong";
        case errc::eta_zero: return "EtaZero";
        case errc::non_monotone: return "NonMonotone";
        case errc::solution_too_short: return "SolutionTooShort";
        case errc::denominator_vanished: return "DenominatorVanished";
        case errc::horizon_mismatch: return "HorizonMismatch";
        case errc::not_decaying: return "NotDecaying";
        case errc::unanchored_check: return "UnanchoredCheck";
    }
    return "Unknown";
}

monotone_fn::monotone_fn(trajectory fn) : fn_(std::move(fn)) {
    if (fn_.dim() != 1 || fn_.node_count() < 2) {
        throw error(errc::invalid_params, "monotone function must be a scalar trajectory");
    }
    slope_floor_ = fn_.min_derivative();
    if (!(slope_floor_ > 0)) {
        throw error(errc::non_monotone, "trajectory derivative is not strictly positive");
    }
}

double invert_monotone(const monotone_fn& fn, double target, interval bracket) {
    const auto value = [&](double t) { return fn(t); };
    const auto slope = [&](double t) { return fn.derivative(t); };
    return safeguarded_newton(value, slope, target, bracket);
}

double invert_monotone(const monotone_fn& fn, double target) {
    const trajectory& traj = fn.underlying();
    const auto nodes = traj.nodes();
    const std::size_t n = traj.node_count();
    // Node values are increasing; find the first node whose value reaches the target.
    std::size_t lo = 0;
    std::size_t hi = n - 1;
    const double tol = inversion_tolerance;
    if (target < traj.node_value(0, 0) - tol || target > traj.node_value(n - 1, 0) + tol) {
        throw error(errc::bracket_invalid, "target outside the range of the monotone function");
    }
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (traj.node_value(mid, 0) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return invert_monotone(fn, target, {nodes[lo], nodes[hi]});
}

}  // namespace sdd
