#include "ndelie/ndesolve.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ndelie/classify.hpp"
#include "ndelie/numeric_function.hpp"
#include "ndelie/parse.hpp"

namespace ndelie {

InitialFunction::InitialFunction(const Expr& th) : theta(normalize(th)) {
    try {
        derivs[0] = theta;
        derivs[1] = diff(theta, Jet::T);
        derivs[2] = diff(derivs[1], Jet::T);
    } catch (const SymbolicError& e) {
        throw SolveError(std::string("initial function is not twice differentiable: ") + e.what());
    }
    for (Jet j : {Jet::X, Jet::XR, Jet::X1, Jet::X1R, Jet::X2, Jet::X2R})
        if (depends_on(theta, j)) throw SolveError("initial function must depend on t only");
}

InitialFunction InitialFunction::parse(const std::string& text) { return InitialFunction(ndelie::parse(text)); }

double InitialFunction::operator()(double t, int order, const std::map<std::string, double>& params) const {
    return eval_at(derivs[size_t(order)], t, params);
}

double Trajectory::on_segment(int seg, double s, int order) const {
    size_t i = size_t(seg);
    double x0 = x_[i], x1 = x_[i + 1], v0 = v_[i], v1 = v_[i + 1], a0 = ar_[i], a1 = al_[i + 1];
    switch (order) {
        case 0: return Hermite3::value(x0, v0, x1, v1, h, s);
        case 1: return Hermite3::value(v0, a0, v1, a1, h, s);
        case 2: return Hermite3::slope(v0, a0, v1, a1, h, s);
        default: throw std::out_of_range("trajectory derivative order above 2");
    }
}

double Trajectory::operator()(double t, int order) const {
    double eps = 1e-12 * std::max(1.0, std::abs(t));
    if (t < lo() - eps || t > hi() + eps) throw DomainError("t=" + std::to_string(t) + " outside the trajectory span");
    if (t <= t0) return (*theta_)(t, order, params_);
    int seg = int(std::floor((t - t0) / h));
    seg = std::clamp(seg, 0, int(x_.size()) - 2);
    return on_segment(seg, t - node_t(size_t(seg)), order);
}

double Trajectory::breakpoint_distance(double t) const {
    double m = std::max(0.0, std::round((t - t0) / r));
    return std::abs(t - (t0 + m * r));
}

Trajectory Trajectory::with_scaled_solution(double f) const {
    Trajectory out = *this;
    for (size_t i = 1; i < x_.size(); ++i) {
        out.x_[i] *= f;
        out.v_[i] *= f;
        out.ar_[i] *= f;
        out.al_[i] *= f;
    }
    out.ar_[0] *= f;
    return out;
}

CoeffCallable Trajectory::callable() const {
    auto self = std::make_shared<const Trajectory>(*this);
    return [self](double t, int order) { return (*self)(t, order); };
}

FnTable Trajectory::binding(const std::string& name) const {
    FnTable f;
    f.coeffs[name] = callable();
    return f;
}

void Trajectory::write_csv(std::ostream& os, int per_step) const {
    os << "t,x,xprime,xsecond\n";
    os.precision(17);
    per_step = std::max(1, per_step);
    auto row = [&](double t, double x, double v, double a) { os << t << ',' << x << ',' << v << ',' << a << '\n'; };
    for (int i = 0; i <= N * per_step; ++i) {
        double t = lo() + r * i / double(N * per_step);
        row(t, (*this)(t, 0), (*this)(t, 1), (*this)(t, 2));
    }
    for (size_t seg = 0; seg + 1 < x_.size(); ++seg)
        for (int j = 1; j <= per_step; ++j) {
            double s = h * j / per_step;
            row(node_t(seg) + s, on_segment(int(seg), s, 0), on_segment(int(seg), s, 1), on_segment(int(seg), s, 2));
        }
}

Trajectory integrate(const NdeSpec& spec, const InitialFunction& theta, double T, int N) {
    if (spec.r.symbolic) throw SolveError("integration needs a numeric delay");
    if (N < 16) throw SolveError("steps per delay must be at least 16");
    double r = spec.r.value();
    double M = (T - spec.t0) / r;
    long Mi = std::lround(M);
    if (Mi < 1 || std::abs(M - double(Mi)) > 1e-9 * std::max(1.0, M))
        throw SolveError("T - t0 must be a positive whole number of delays (got " + std::to_string(M) + ")");

    Trajectory tr;
    tr.t0 = spec.t0;
    tr.r = r;
    tr.N = N;
    tr.h = r / N;
    tr.T = spec.t0 + double(Mi) * r;
    tr.params_ = spec.numeric_params();
    tr.theta_ = std::make_shared<const InitialFunction>(theta);

    std::array<CoeffCallable, 6> co;
    for (int i = 0; i < 6; ++i) co[size_t(i)] = coefficient_callable(spec, NdeSpec::kSlots[i]);
    std::array<bool, 6> zero;
    for (int i = 0; i < 6; ++i) zero[size_t(i)] = spec.slot(NdeSpec::kSlots[i]).is_zero();
    auto coef = [&](int i, double t) { return zero[size_t(i)] ? 0.0 : co[size_t(i)](t, 0); };

    const double h = tr.h;
    const size_t total = size_t(Mi) * size_t(N);
    tr.x_.assign(total + 1, 0);
    tr.v_.assign(total + 1, 0);
    tr.ar_.assign(total + 1, 0);
    tr.al_.assign(total + 1, 0);

    // delayed (x, x', x'') for node i plus offset c*h, read on segment i - N
    auto delayed = [&](size_t i, double c) -> std::array<double, 3> {
        double t = tr.node_t(i) + c * h - r;
        if (i < size_t(N)) {
            double tc = std::min(t, tr.t0);
            return {theta(tc, 0, tr.params_), theta(tc, 1, tr.params_), theta(tc, 2, tr.params_)};
        }
        int seg = int(i) - N;
        return {tr.on_segment(seg, c * h, 0), tr.on_segment(seg, c * h, 1), tr.on_segment(seg, c * h, 2)};
    };
    auto accel = [&](double t, double x, double v, const std::array<double, 3>& d) {
        // a b c d k h
        return coef(5, t) - coef(0, t) * v - coef(1, t) * d[1] - coef(2, t) * x - coef(3, t) * d[0] - coef(4, t) * d[2];
    };

    double t0 = tr.t0;
    tr.x_[0] = theta(t0, 0, tr.params_);
    tr.v_[0] = theta(t0, 1, tr.params_);
    tr.al_[0] = theta(t0, 2, tr.params_);
    tr.ar_[0] = accel(t0, tr.x_[0], tr.v_[0], delayed(0, 0));
    if (!std::isfinite(tr.x_[0]) || !std::isfinite(tr.v_[0])) throw SolveError("initial function not finite at t0");

    for (size_t i = 0; i < total; ++i) {
        double t = tr.node_t(i), x = tr.x_[i], v = tr.v_[i];
        auto dm = delayed(i, 0.5), d1 = delayed(i, 1);
        double k1x = v, k1v = tr.ar_[i];
        double k2x = v + h / 2 * k1v, k2v = accel(t + h / 2, x + h / 2 * k1x, v + h / 2 * k1v, dm);
        double k3x = v + h / 2 * k2v, k3v = accel(t + h / 2, x + h / 2 * k2x, v + h / 2 * k2v, dm);
        double k4x = v + h * k3v, k4v = accel(t + h, x + h * k3x, v + h * k3v, d1);
        double xn = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
        double vn = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
        if (!std::isfinite(xn) || !std::isfinite(vn))
            throw SolveError("solution diverged near t = " + std::to_string(t + h));
        tr.x_[i + 1] = xn;
        tr.v_[i + 1] = vn;
        tr.al_[i + 1] = accel(t + h, xn, vn, d1);
        tr.ar_[i + 1] = i + 1 < total ? accel(t + h, xn, vn, delayed(i + 1, 0)) : tr.al_[i + 1];
    }
    return tr;
}

double residual(const Trajectory& traj, const NdeSpec& spec, const std::vector<double>& samples) {
    std::array<CoeffCallable, 6> co;
    for (int i = 0; i < 6; ++i) co[size_t(i)] = coefficient_callable(spec, NdeSpec::kSlots[i]);
    double r = spec.r.value(), worst = 0;
    for (double t : samples) {
        if (t <= traj.t0 || t > traj.hi()) throw DomainError("residual sample t=" + std::to_string(t) + " outside (t0, T]");
        double x = traj(t, 0), v = traj(t, 1), a = traj(t, 2);
        double xr = traj(t - r, 0), vr = traj(t - r, 1), ar = traj(t - r, 2);
        double res = a + co[0](t, 0) * v + co[1](t, 0) * vr + co[2](t, 0) * x + co[3](t, 0) * xr + co[4](t, 0) * ar - co[5](t, 0);
        worst = std::max(worst, std::abs(res));
    }
    return worst;
}

std::vector<double> interior_samples(const Trajectory& traj, int per_step, double margin_steps) {
    std::vector<double> out;
    size_t segs = traj.nodes() - 1;
    for (size_t i = 0; i < segs; ++i)
        for (int j = 0; j < per_step; ++j) {
            double t = traj.node_t(i) + traj.h * (j + 0.5) / per_step;
            if (traj.breakpoint_distance(t) < margin_steps * traj.h) continue;
            out.push_back(t);
        }
    return out;
}

Trajectory solve_homogeneous_slot(const NdeSpec& spec, const InitialFunction& seed, double T, int N) {
    if (!spec.h.is_zero()) throw SolveError("rho solves the homogeneous equation; spec has h != 0");
    Trajectory tr = integrate(spec, seed, T, N);
    tr.tag = "rho";
    return tr;
}

}  // namespace ndelie
