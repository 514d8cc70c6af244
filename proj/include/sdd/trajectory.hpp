#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace sdd {

using vec = Eigen::VectorXd;

// Which one-sided limit to use when a query lands exactly on a node.
enum class side { right, left };

struct interval {
    double lo;
    double hi;
};

// Piecewise cubic Hermite function of time, R -> R^m.
//
// Node values are shared by adjacent segments, so the function is continuous
// by construction. Derivatives are stored per node twice (as seen from the
// segment on the left and on the right) so that derivative kinks at nodes are
// representable; the right-hand value is returned at a node unless side::left
// is requested. Instances are immutable once built; see trajectory_builder.
class trajectory {
   public:
    trajectory() = default;

    // Constant value on [t_lo, t_hi] as a single segment.
    static trajectory constant(double t_lo, double t_hi, const vec& value);

    // Samples value/derivative callables at the given strictly increasing nodes.
    template <typename Value, typename Derivative>
    static trajectory sample(std::span<const double> nodes, Value&& value, Derivative&& derivative);

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] bool empty() const noexcept { return times_.empty(); }
    [[nodiscard]] std::size_t node_count() const noexcept { return times_.size(); }
    [[nodiscard]] std::size_t segment_count() const noexcept {
        return times_.empty() ? 0 : times_.size() - 1;
    }
    [[nodiscard]] double t_min() const { return times_.front(); }
    [[nodiscard]] double t_max() const { return times_.back(); }
    [[nodiscard]] interval domain() const { return {t_min(), t_max()}; }
    [[nodiscard]] std::span<const double> nodes() const noexcept { return times_; }
    [[nodiscard]] bool contains(double t) const noexcept;

    [[nodiscard]] vec eval(double t, side s = side::right) const;
    [[nodiscard]] vec eval_derivative(double t, side s = side::right) const;

    // Single component access; avoids allocating for scalar trajectories.
    [[nodiscard]] double value(double t, int component = 0, side s = side::right) const;
    [[nodiscard]] double slope(double t, int component = 0, side s = side::right) const;

    [[nodiscard]] vec node_value(std::size_t i) const;
    [[nodiscard]] double node_value(std::size_t i, int component) const {
        return values_[i * dim_ + component];
    }
    [[nodiscard]] vec node_derivative(std::size_t i, side s) const;
    [[nodiscard]] double node_derivative(std::size_t i, int component, side s) const {
        return (s == side::left ? d_left_ : d_right_)[i * dim_ + component];
    }

    // Index of the segment that serves queries at t with the given side convention.
    [[nodiscard]] std::size_t locate(double t, side s = side::right) const;

    // Evaluates the cubic of segment i at any t, including outside the segment
    // (used as an extrapolating predictor by the solvers).
    [[nodiscard]] double segment_value(std::size_t i, double t, int component) const;
    [[nodiscard]] double segment_slope(std::size_t i, double t, int component) const;

    // Sub-trajectory spanning nodes [first, last].
    [[nodiscard]] trajectory slice(std::size_t first, std::size_t last) const;

    // Exact minimum of the derivative of a scalar trajectory (each segment
    // derivative is a quadratic, minimised in closed form).
    [[nodiscard]] double min_derivative(int component = 0) const;
    [[nodiscard]] double max_derivative(int component = 0) const;
    [[nodiscard]] double max_abs_derivative_at_nodes() const;

   private:
    friend class trajectory_builder;

    double checked_time(double t) const;

    int dim_ = 0;
    std::vector<double> times_;
    std::vector<double> values_;
    std::vector<double> d_left_;
    std::vector<double> d_right_;
};

// Appends nodes to a trajectory; the partially built trajectory stays
// readable through view(), which the solvers use for history lookup.
class trajectory_builder {
   public:
    explicit trajectory_builder(int dim);
    explicit trajectory_builder(trajectory seed);

    void reserve(std::size_t nodes);

    // Smooth node: same derivative on both sides.
    void push(double t, const vec& value, const vec& derivative) {
        push(t, value, derivative, derivative);
    }
    void push(double t, const vec& value, const vec& d_left, const vec& d_right);
    void push(double t, double value, double d_left, double d_right);

    // Overrides the right-hand derivative of the last node (used when a
    // solution continues a history with a derivative jump).
    void set_tail_derivative(const vec& d_right);

    [[nodiscard]] const trajectory& view() const noexcept { return traj_; }
    [[nodiscard]] trajectory finish() && { return std::move(traj_); }

   private:
    trajectory traj_;
};

template <typename Value, typename Derivative>
trajectory trajectory::sample(std::span<const double> nodes, Value&& value, Derivative&& derivative) {
    const vec first = value(nodes.front());
    trajectory_builder builder(static_cast<int>(first.size()));
    builder.reserve(nodes.size());
    for (double t : nodes) builder.push(t, value(t), derivative(t));
    return std::move(builder).finish();
}

// Uniform node grid lo, lo + step, ..., with the last node exactly hi.
std::vector<double> uniform_nodes(double lo, double hi, std::size_t segments);

}  // namespace sdd
