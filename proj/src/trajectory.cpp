#include "sdd/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sdd/error.hpp"

namespace sdd {

namespace {

struct hermite_basis {
    double h00, h10, h01, h11;
};

hermite_basis basis(double u) {
    const double u2 = u * u;
    const double u3 = u2 * u;
    return {2 * u3 - 3 * u2 + 1, u3 - 2 * u2 + u, -2 * u3 + 3 * u2, u3 - u2};
}

hermite_basis basis_derivative(double u) {
    const double u2 = u * u;
    return {6 * u2 - 6 * u, 3 * u2 - 4 * u + 1, -6 * u2 + 6 * u, 3 * u2 - 2 * u};
}

double domain_slack(double a, double b) {
    return 1e-13 * (1.0 + std::max(std::abs(a), std::abs(b)));
}

}  // namespace

std::vector<double> uniform_nodes(double lo, double hi, std::size_t segments) {
    std::vector<double> out(segments + 1);
    const double step = (hi - lo) / static_cast<double>(segments);
    for (std::size_t k = 0; k <= segments; ++k) out[k] = lo + static_cast<double>(k) * step;
    out.back() = hi;
    return out;
}

trajectory trajectory::constant(double t_lo, double t_hi, const vec& value) {
    trajectory_builder builder(static_cast<int>(value.size()));
    const vec zero = vec::Zero(value.size());
    builder.push(t_lo, value, zero);
    builder.push(t_hi, value, zero);
    return std::move(builder).finish();
}

bool trajectory::contains(double t) const noexcept {
    if (times_.empty()) return false;
    const double slack = domain_slack(times_.front(), times_.back());
    return t >= times_.front() - slack && t <= times_.back() + slack;
}

double trajectory::checked_time(double t) const {
    if (!contains(t) || !std::isfinite(t)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "time " << t << " outside trajectory domain";
        if (!times_.empty()) msg << " [" << times_.front() << ", " << times_.back() << "]";
        throw error(errc::out_of_domain, msg.str());
    }
    return std::clamp(t, times_.front(), times_.back());
}

std::size_t trajectory::locate(double t, side s) const {
    const std::size_t last = segment_count() - 1;
    auto it = s == side::right ? std::upper_bound(times_.begin(), times_.end(), t)
                               : std::lower_bound(times_.begin(), times_.end(), t);
    const auto idx = static_cast<std::ptrdiff_t>(it - times_.begin()) - 1;
    if (idx < 0) return 0;
    return std::min(static_cast<std::size_t>(idx), last);
}

double trajectory::segment_value(std::size_t i, double t, int c) const {
    const double t0 = times_[i];
    const double width = times_[i + 1] - t0;
    const hermite_basis b = basis((t - t0) / width);
    const std::size_t a = i * dim_ + c;
    const std::size_t z = (i + 1) * dim_ + c;
    return b.h00 * values_[a] + b.h10 * width * d_right_[a] + b.h01 * values_[z] +
           b.h11 * width * d_left_[z];
}

double trajectory::value(double t, int c, side s) const {
    t = checked_time(t);
    if (times_.size() == 1) return values_[c];
    const std::size_t i = locate(t, s);
    // Nodes are returned verbatim so that joins are exact.
    if (t == times_[i]) return values_[i * dim_ + c];
    if (t == times_[i + 1]) return values_[(i + 1) * dim_ + c];
    return segment_value(i, t, c);
}

double trajectory::slope(double t, int c, side s) const {
    t = checked_time(t);
    if (times_.size() == 1) return d_right_[c];
    return segment_slope(locate(t, s), t, c);
}

double trajectory::segment_slope(std::size_t i, double t, int c) const {
    const double t0 = times_[i];
    const double width = times_[i + 1] - t0;
    const hermite_basis b = basis_derivative((t - t0) / width);
    const std::size_t a = i * dim_ + c;
    const std::size_t z = (i + 1) * dim_ + c;
    return (b.h00 * values_[a] + b.h01 * values_[z]) / width + b.h10 * d_right_[a] +
           b.h11 * d_left_[z];
}

vec trajectory::eval(double t, side s) const {
    vec out(dim_);
    for (int c = 0; c < dim_; ++c) out[c] = value(t, c, s);
    return out;
}

vec trajectory::eval_derivative(double t, side s) const {
    vec out(dim_);
    for (int c = 0; c < dim_; ++c) out[c] = slope(t, c, s);
    return out;
}

vec trajectory::node_value(std::size_t i) const {
    return Eigen::Map<const vec>(values_.data() + i * dim_, dim_);
}

vec trajectory::node_derivative(std::size_t i, side s) const {
    const auto& d = s == side::left ? d_left_ : d_right_;
    return Eigen::Map<const vec>(d.data() + i * dim_, dim_);
}

trajectory trajectory::slice(std::size_t first, std::size_t last) const {
    if (first >= last || last >= times_.size()) {
        throw error(errc::out_of_domain, "invalid trajectory slice");
    }
    trajectory out;
    out.dim_ = dim_;
    out.times_.assign(times_.begin() + first, times_.begin() + last + 1);
    const auto lo = static_cast<std::ptrdiff_t>(first * dim_);
    const auto hi = static_cast<std::ptrdiff_t>((last + 1) * dim_);
    out.values_.assign(values_.begin() + lo, values_.begin() + hi);
    out.d_left_.assign(d_left_.begin() + lo, d_left_.begin() + hi);
    out.d_right_.assign(d_right_.begin() + lo, d_right_.begin() + hi);
    return out;
}

namespace {

// Extremum of a Hermite segment derivative p'(u) = qa u^2 + qb u + d0, u in [0, 1].
double segment_derivative_extremum(double width, double y0, double y1, double d0, double d1, bool lowest) {
    const double secant = (y1 - y0) / width;
    const double qa = 3 * d0 + 3 * d1 - 6 * secant;
    const double qb = 6 * secant - 4 * d0 - 2 * d1;
    double best = lowest ? std::min(d0, d1) : std::max(d0, d1);
    if (qa != 0) {
        const double u = -qb / (2 * qa);
        if (u > 0 && u < 1) {
            const double v = (qa * u + qb) * u + d0;
            best = lowest ? std::min(best, v) : std::max(best, v);
        }
    }
    return best;
}

}  // namespace

double trajectory::min_derivative(int c) const {
    double lowest = d_right_.empty() ? 0.0 : d_right_[c];
    for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
        lowest = std::min(lowest, segment_derivative_extremum(
                                      times_[i + 1] - times_[i], values_[i * dim_ + c], values_[(i + 1) * dim_ + c],
                                      d_right_[i * dim_ + c], d_left_[(i + 1) * dim_ + c], true));
    }
    return lowest;
}

double trajectory::max_derivative(int c) const {
    double highest = d_right_.empty() ? 0.0 : d_right_[c];
    for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
        highest = std::max(highest, segment_derivative_extremum(
                                        times_[i + 1] - times_[i], values_[i * dim_ + c], values_[(i + 1) * dim_ + c],
                                        d_right_[i * dim_ + c], d_left_[(i + 1) * dim_ + c], false));
    }
    return highest;
}

double trajectory::max_abs_derivative_at_nodes() const {
    double best = 0;
    for (std::size_t i = 0; i < times_.size(); ++i) {
        for (side s : {side::left, side::right}) {
            best = std::max(best, node_derivative(i, s).norm());
        }
    }
    return best;
}

trajectory_builder::trajectory_builder(int dim) {
    if (dim <= 0) throw error(errc::invalid_params, "trajectory dimension must be positive");
    traj_.dim_ = dim;
}

trajectory_builder::trajectory_builder(trajectory seed) : traj_(std::move(seed)) {
    if (traj_.dim_ <= 0) throw error(errc::invalid_params, "seed trajectory has no dimension");
}

void trajectory_builder::reserve(std::size_t nodes) {
    const std::size_t m = static_cast<std::size_t>(traj_.dim_);
    traj_.times_.reserve(nodes);
    traj_.values_.reserve(nodes * m);
    traj_.d_left_.reserve(nodes * m);
    traj_.d_right_.reserve(nodes * m);
}

void trajectory_builder::push(double t, const vec& value, const vec& d_left, const vec& d_right) {
    if (value.size() != traj_.dim_ || d_left.size() != traj_.dim_ || d_right.size() != traj_.dim_) {
        throw error(errc::invalid_params, "node dimension does not match trajectory");
    }
    if (!traj_.times_.empty() && !(t > traj_.times_.back())) {
        throw error(errc::invalid_params, "trajectory nodes must be strictly increasing");
    }
    traj_.times_.push_back(t);
    traj_.values_.insert(traj_.values_.end(), value.data(), value.data() + value.size());
    traj_.d_left_.insert(traj_.d_left_.end(), d_left.data(), d_left.data() + d_left.size());
    traj_.d_right_.insert(traj_.d_right_.end(), d_right.data(), d_right.data() + d_right.size());
}

void trajectory_builder::push(double t, double value, double d_left, double d_right) {
    push(t, vec::Constant(1, value), vec::Constant(1, d_left), vec::Constant(1, d_right));
}

void trajectory_builder::set_tail_derivative(const vec& d_right) {
    if (traj_.times_.empty() || d_right.size() != traj_.dim_) {
        throw error(errc::invalid_params, "cannot set tail derivative");
    }
    std::copy(d_right.data(), d_right.data() + d_right.size(),
              traj_.d_right_.end() - traj_.dim_);
}

}  // namespace sdd
