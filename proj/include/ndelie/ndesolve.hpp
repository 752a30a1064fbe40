#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "ndelie/eval.hpp"
#include "ndelie/expr.hpp"
#include "ndelie/spec.hpp"

namespace ndelie {

struct SolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Closed-form history x = theta(t) on [t0 - r, t0].
struct InitialFunction {
    Expr theta;
    std::array<Expr, 3> derivs;  // theta, theta', theta''

    explicit InitialFunction(const Expr& theta);
    static InitialFunction parse(const std::string& text);
    double operator()(double t, int order, const std::map<std::string, double>& params = {}) const;
};

/// Method-of-steps solution on [t0 - r, T]. Grid t0 + i*h with h = r/N.
/// x is cubic Hermite from (x, x'), x' cubic Hermite from (x', x''), x'' the
/// slope of the x' interpolant. x'' jumps at t0 + m*r, so each node keeps its
/// left and right limits.
class Trajectory {
public:
    double t0 = 0, r = 1, h = 1, T = 0;
    int N = 0;
    std::string tag;  // "rho" for homogeneous-slot trajectories

    /// order 0..2; t <= t0 reads the history, later t the segment [t_i, t_(i+1)).
    double operator()(double t, int order) const;
    /// Same, but on segment `seg` (ignores the segment search; used for one-sided limits).
    double on_segment(int seg, double s, int order) const;

    double lo() const { return t0 - r; }
    double hi() const { return T; }
    size_t nodes() const { return x_.size(); }
    double node_t(size_t i) const { return t0 + double(i) * h; }
    double node_x(size_t i) const { return x_[i]; }
    double node_v(size_t i) const { return v_[i]; }
    double node_a_right(size_t i) const { return ar_[i]; }
    double node_a_left(size_t i) const { return al_[i]; }
    const InitialFunction& history() const { return *theta_; }

    /// Distance to the nearest t0 + m*r, m >= 0.
    double breakpoint_distance(double t) const;

    /// The solution part (t > t0) multiplied by f, history untouched.
    Trajectory with_scaled_solution(double f) const;

    CoeffCallable callable() const;
    FnTable binding(const std::string& name) const;

    /// Columns t, x, xprime, xsecond; `per_step` samples per grid interval.
    void write_csv(std::ostream& os, int per_step = 1) const;

private:
    friend Trajectory integrate(const NdeSpec&, const InitialFunction&, double, int);
    std::shared_ptr<const InitialFunction> theta_;
    std::map<std::string, double> params_;
    std::vector<double> x_, v_, ar_, al_;
};

/// RK4 on (x, x') with delayed values from the history or finished segments.
/// T - t0 must be a whole number of delays and N >= 16.
Trajectory integrate(const NdeSpec& spec, const InitialFunction& theta, double T, int N);

/// Max |x'' + a x' + b x'(t-r) + c x + d x(t-r) + k x''(t-r) - h| over samples.
double residual(const Trajectory& traj, const NdeSpec& spec, const std::vector<double>& samples);

/// Uniform interior samples, `per_step` per grid interval, skipping a margin
/// around each breakpoint t0 + m*r.
std::vector<double> interior_samples(const Trajectory& traj, int per_step = 4, double margin_steps = 0.5);

/// A concrete solution of the homogeneous equation, tagged as a rho binding.
Trajectory solve_homogeneous_slot(const NdeSpec& spec, const InitialFunction& seed, double T, int N);

}  // namespace ndelie
