#include "ndelie/flowverify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ndelie/numeric_function.hpp"

namespace ndelie {

using nlohmann::json;

GeneratorField::GeneratorField(const Generator& g, FnTable fns) : fns_(std::move(fns)) {
    f_ = {normalize(g.omega), normalize(g.upsilon)};
    const Jet q[2] = {Jet::T, Jet::X};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            df_[size_t(i)][size_t(j)] = diff(f_[size_t(i)], q[j]);
            for (int k = 0; k < 2; ++k) d2f_[size_t(i)][size_t(j)][size_t(k)] = diff(df_[size_t(i)][size_t(j)], q[k]);
        }
}

double GeneratorField::eval(const Expr& e, double t, double x) const {
    if (e.is_zero_literal()) return 0;
    if (e.is_constant()) return e.value().get_d();
    EvalEnv env;
    env.set(Jet::T, t).set(Jet::X, x);
    env.fns = &fns_;
    return eval_numeric(e, env);
}

std::array<double, 2> GeneratorField::value(double t, double x) const { return {eval(f_[0], t, x), eval(f_[1], t, x)}; }

GeneratorField::Jet2 GeneratorField::jet(double t, double x) const {
    Jet2 j;
    for (size_t i = 0; i < 2; ++i) {
        j.f[i] = eval(f_[i], t, x);
        for (size_t a = 0; a < 2; ++a) {
            j.df[i][a] = eval(df_[i][a], t, x);
            for (size_t b = 0; b < 2; ++b) j.d2f[i][a][b] = eval(d2f_[i][a][b], t, x);
        }
    }
    return j;
}

namespace {

/// p, J, H packed: 2 + 4 + 8
using VarState = std::array<double, 14>;

double& J(VarState& s, int i, int j) { return s[size_t(2 + 2 * i + j)]; }
double& H(VarState& s, int i, int j, int k) { return s[size_t(6 + 4 * i + 2 * j + k)]; }
double Jc(const VarState& s, int i, int j) { return s[size_t(2 + 2 * i + j)]; }
double Hc(const VarState& s, int i, int j, int k) { return s[size_t(6 + 4 * i + 2 * j + k)]; }

VarState var_rhs(const GeneratorField& F, const VarState& s, bool variational) {
    VarState d{};
    if (!variational) {
        auto f = F.value(s[0], s[1]);
        d[0] = f[0];
        d[1] = f[1];
        return d;
    }
    auto g = F.jet(s[0], s[1]);
    d[0] = g.f[0];
    d[1] = g.f[1];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double acc = 0;
            for (int l = 0; l < 2; ++l) acc += g.df[size_t(i)][size_t(l)] * Jc(s, l, j);
            J(d, i, j) = acc;
            for (int k = 0; k < 2; ++k) {
                double h = 0;
                for (int l = 0; l < 2; ++l) {
                    h += g.df[size_t(i)][size_t(l)] * Hc(s, l, j, k);
                    for (int m = 0; m < 2; ++m) h += g.d2f[size_t(i)][size_t(l)][size_t(m)] * Jc(s, l, j) * Jc(s, m, k);
                }
                H(d, i, j, k) = h;
            }
        }
    return d;
}

VarState integrate_flow(const GeneratorField& F, double t, double x, double delta, const FlowOptions& opts, bool variational) {
    VarState s{};
    s[0] = t;
    s[1] = x;
    J(s, 0, 0) = J(s, 1, 1) = 1;
    if (delta == 0) return s;
    if (std::abs(delta) > opts.delta_bound * (1 + 1e-12))
        throw std::invalid_argument("|delta| exceeds the configured bound " + std::to_string(opts.delta_bound));
    int n = std::max(1, opts.substeps);
    double h = delta / n;
    size_t dim = variational ? 14 : 2;
    for (int step = 0; step < n; ++step) {
        VarState k1 = var_rhs(F, s, variational), tmp = s;
        for (size_t i = 0; i < dim; ++i) tmp[i] = s[i] + h / 2 * k1[i];
        VarState k2 = var_rhs(F, tmp, variational);
        for (size_t i = 0; i < dim; ++i) tmp[i] = s[i] + h / 2 * k2[i];
        VarState k3 = var_rhs(F, tmp, variational);
        for (size_t i = 0; i < dim; ++i) tmp[i] = s[i] + h * k3[i];
        VarState k4 = var_rhs(F, tmp, variational);
        for (size_t i = 0; i < dim; ++i) s[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    for (size_t i = 0; i < dim; ++i)
        if (!std::isfinite(s[i])) throw DomainError("flow left the domain of the generator");
    return s;
}

}  // namespace

std::vector<FlowPoint> flow(const GeneratorField& field, const std::vector<std::pair<double, double>>& points, double delta,
                            const FlowOptions& opts) {
    std::vector<FlowPoint> out;
    out.reserve(points.size());
    for (const auto& [t, x] : points) {
        FlowPoint p;
        try {
            auto s = integrate_flow(field, t, x, delta, opts, false);
            p.t = s[0];
            p.x = s[1];
        } catch (const DomainError&) {
            p.ok = false;
        }
        out.push_back(p);
    }
    return out;
}

CurvePoint flow_curve_point(const GeneratorField& field, const CurvePoint& p, double delta, const FlowOptions& opts) {
    VarState s = integrate_flow(field, p.t, p.x, delta, opts, true);
    const double q1[2] = {1, p.v}, q2[2] = {0, p.a};
    double P1[2], P2[2];
    for (int i = 0; i < 2; ++i) {
        P1[i] = Jc(s, i, 0) * q1[0] + Jc(s, i, 1) * q1[1];
        P2[i] = Jc(s, i, 0) * q2[0] + Jc(s, i, 1) * q2[1];
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) P2[i] += Hc(s, i, j, k) * q1[j] * q1[k];
    }
    CurvePoint out;
    out.t = s[0];
    out.x = s[1];
    if (!(P1[0] > 0)) {
        out.v = out.a = std::nan("");
        return out;
    }
    out.v = P1[1] / P1[0];
    out.a = (P2[1] * P1[0] - P1[1] * P2[0]) / (P1[0] * P1[0] * P1[0]);
    return out;
}

double TransformedCurve::operator()(double tau, int order) const {
    double eps = 1e-12 * std::max(1.0, std::abs(tau));
    if (tau < lo() - eps || tau > hi() + eps) throw DomainError("tau=" + std::to_string(tau) + " outside the transformed curve");
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), tau,
                               [](double v, const std::pair<CurvePoint, CurvePoint>& p) { return v < p.first.t; });
    size_t i = it == pieces_.begin() ? 0 : size_t(it - pieces_.begin()) - 1;
    const auto& [A, B] = pieces_[i];
    double a[3] = {A.x, A.v, A.a}, b[3] = {B.x, B.v, B.a}, out[3];
    Hermite5::eval(a, b, B.t - A.t, tau - A.t, out);
    return out[order];
}

TransformedCurve transform_solution(const Trajectory& traj, const GeneratorField& field, double delta, const FlowOptions& opts) {
    TransformedCurve tc;
    int N = traj.N;
    auto history_point = [&](int i) {
        double t = traj.t0 - traj.r + traj.r * i / N;
        return CurvePoint{t, traj(t, 0), traj(t, 1), traj(t, 2)};
    };
    auto map = [&](const CurvePoint& p) {
        CurvePoint q = flow_curve_point(field, p, delta, opts);
        if (!std::isfinite(q.v)) tc.monotone = false;
        return q;
    };
    std::vector<CurvePoint> hist;
    for (int i = 0; i <= N; ++i) hist.push_back(map(history_point(i)));
    for (int i = 0; i < N; ++i) tc.pieces_.push_back({hist[size_t(i)], hist[size_t(i + 1)]});
    for (size_t seg = 0; seg + 1 < traj.nodes(); ++seg) {
        double ta = traj.node_t(seg), tb = traj.node_t(seg + 1);
        CurvePoint a{ta, traj.on_segment(int(seg), 0, 0), traj.on_segment(int(seg), 0, 1), traj.on_segment(int(seg), 0, 2)};
        CurvePoint b{tb, traj.on_segment(int(seg), traj.h, 0), traj.on_segment(int(seg), traj.h, 1),
                     traj.on_segment(int(seg), traj.h, 2)};
        tc.pieces_.push_back({map(a), map(b)});
        if (seg % size_t(N) == 0) tc.breaks_.push_back(tc.pieces_.back().first.t);
    }
    tc.breaks_.push_back(tc.pieces_.back().second.t);
    for (const auto& [A, B] : tc.pieces_)
        if (!(B.t > A.t)) tc.monotone = false;
    if (!tc.monotone) throw SolveError("transformed curve is not a graph over tbar");
    return tc;
}

FnTable check_functions(const NdeSpec& spec, const Generator& g, const Trajectory* rho) {
    FnTable fns = spec.functions();
    fns.merge(g.bindings);
    if (rho) fns.merge(rho->binding("rho"));
    return fns;
}

InfinitesimalResult infinitesimal_check(const Trajectory& traj, const Generator& g, const NdeSpec& spec, const FnTable& fns,
                                        const std::vector<double>& samples) {
    InfinitesimalResult res;
    Expr z = invariance_residual(spec, g.ansatz());
    if (z.is_zero_literal()) return res;
    std::vector<Expr> terms = z.kind() == Expr::Kind::Sum ? z.operands() : std::vector<Expr>{z};
    double r = spec.r.value();
    std::map<std::string, double> params = spec.numeric_params();
    for (double t : samples) {
        if (t - r < traj.lo()) throw DomainError("sample t=" + std::to_string(t) + " needs history before the span");
        EvalEnv env;
        env.fns = &fns;
        env.params = params;
        env.set(Jet::T, t)
            .set(Jet::X, traj(t, 0))
            .set(Jet::X1, traj(t, 1))
            .set(Jet::X2, traj(t, 2))
            .set(Jet::XR, traj(t - r, 0))
            .set(Jet::X1R, traj(t - r, 1))
            .set(Jet::X2R, traj(t - r, 2));
        double sum = 0, abs_sum = 0;
        for (const auto& term : terms) {
            double v = eval_numeric(term, env);
            sum += v;
            abs_sum += std::abs(v);
        }
        res.residual = std::max(res.residual, std::abs(sum));
        res.scale = std::max(res.scale, abs_sum);
    }
    res.normalized = res.residual / std::max(1.0, res.scale);
    return res;
}

FiniteResult finite_residual(const Trajectory& traj, const GeneratorField& field, const NdeSpec& spec, double delta,
                             const FlowOptions& opts) {
    FiniteResult res;
    res.delta = delta;
    TransformedCurve tc;
    try {
        tc = transform_solution(traj, field, delta, opts);
    } catch (const std::exception& e) {
        res.monotone = false;
        res.error = e.what();
        return res;
    }
    std::array<CoeffCallable, 6> co;
    for (int i = 0; i < 6; ++i) co[size_t(i)] = coefficient_callable(spec, NdeSpec::kSlots[i]);
    double r = spec.r.value(), h = traj.h;
    double first = tc.breaks().front(), last = tc.breaks().back();
    auto near_break = [&](double tau) {
        for (double b : tc.breaks())
            if (std::abs(tau - b) < h) return true;
        return false;
    };
    int per = 4;
    int count = int(std::ceil((last - first) / h)) * per;
    for (int i = 0; i <= count; ++i) {
        double tau = first + (last - first) * i / count;
        if (tau < first + h || tau > last - h) continue;
        if (tau - r < tc.lo() + h) continue;
        if (near_break(tau) || near_break(tau - r)) continue;
        double X = tc(tau, 0), V = tc(tau, 1), A = tc(tau, 2);
        double Xr = tc(tau - r, 0), Vr = tc(tau - r, 1), Ar = tc(tau - r, 2);
        double terms[7] = {A,
                           co[0](tau, 0) * V,
                           co[1](tau, 0) * Vr,
                           co[2](tau, 0) * X,
                           co[3](tau, 0) * Xr,
                           co[4](tau, 0) * Ar,
                           -co[5](tau, 0)};
        double R = 0, S = 0;
        for (double v : terms) {
            R += v;
            S += std::abs(v);
        }
        res.residual = std::max(res.residual, std::abs(R));
        res.scale = std::max(res.scale, S);
        ++res.samples;
    }
    res.normalized = res.residual / std::max(1.0, res.scale);
    if (res.samples == 0) res.error = "no admissible samples on the transformed curve";
    return res;
}

InvarianceReport verify_generator(const Trajectory& traj, const Generator& g, const NdeSpec& spec, const Trajectory* rho,
                                  const VerifyOptions& opts) {
    InvarianceReport rep;
    rep.label = g.label;
    rep.generator = g.render();
    rep.tol_inf = opts.tol_inf;
    rep.tol_fin = opts.tol_fin;
    FnTable fns = check_functions(spec, g, rho);
    std::vector<double> samples;
    for (double t : interior_samples(traj))
        if (t - spec.r.value() >= traj.lo()) samples.push_back(t);
    rep.infinitesimal = infinitesimal_check(traj, g, spec, fns, samples);
    rep.infinitesimal_residual = rep.infinitesimal.normalized;
    rep.inf_pass = rep.infinitesimal_residual < opts.tol_inf;

    GeneratorField field(g, fns);
    rep.fin_pass = true;
    for (double d : opts.deltas) {
        FiniteResult fr = finite_residual(traj, field, spec, d, opts.flow);
        if (!fr.monotone) rep.transformed_monotone = false;
        if (!fr.error.empty() || !(fr.normalized < opts.tol_fin)) rep.fin_pass = false;
        rep.finite_residual = std::max(rep.finite_residual, fr.normalized);
        rep.finite.push_back(fr);
    }
    return rep;
}

AxiomReport group_axioms(const GeneratorField& field, const std::vector<std::pair<double, double>>& points, double d1,
                         double d2, const FlowOptions& opts) {
    AxiomReport rep;
    FlowOptions wide = opts;
    wide.delta_bound = std::max(opts.delta_bound, std::abs(d1) + std::abs(d2));
    auto dist = [](const FlowPoint& a, double t, double x) {
        return std::max(std::abs(a.t - t) / std::max(1.0, std::abs(t)), std::abs(a.x - x) / std::max(1.0, std::abs(x)));
    };
    auto id = flow(field, points, 0, wide);
    auto fwd = flow(field, points, d1, wide);
    auto sum = flow(field, points, d1 + d2, wide);
    std::vector<std::pair<double, double>> mid;
    for (const auto& p : fwd) mid.emplace_back(p.t, p.x);
    auto back = flow(field, mid, -d1, wide);
    auto comp = flow(field, mid, d2, wide);
    for (size_t i = 0; i < points.size(); ++i) {
        if (!fwd[i].ok || !sum[i].ok || !back[i].ok || !comp[i].ok) {
            rep.inverse = rep.closure = std::numeric_limits<double>::infinity();
            continue;
        }
        rep.identity = std::max(rep.identity, dist(id[i], points[i].first, points[i].second));
        rep.inverse = std::max(rep.inverse, dist(back[i], points[i].first, points[i].second));
        rep.closure = std::max(rep.closure, dist(comp[i], sum[i].t, sum[i].x));
    }
    return rep;
}

json to_json(const InvarianceReport& r) {
    json fin = json::array();
    for (const auto& f : r.finite) {
        json j{{"delta", f.delta},       {"residual", f.residual}, {"scale", f.scale},
               {"normalized", f.normalized}, {"samples", f.samples},  {"monotone", f.monotone}};
        if (!f.error.empty()) j["error"] = f.error;
        fin.push_back(j);
    }
    return {{"label", r.label},
            {"generator", r.generator},
            {"infinitesimal_residual", r.infinitesimal_residual},
            {"infinitesimal_raw", r.infinitesimal.residual},
            {"infinitesimal_scale", r.infinitesimal.scale},
            {"finite_residual", r.finite_residual},
            {"transformed_monotone", r.transformed_monotone},
            {"tol_inf", r.tol_inf},
            {"tol_fin", r.tol_fin},
            {"infinitesimal_pass", r.inf_pass},
            {"finite_pass", r.fin_pass},
            {"passed", r.passed()},
            {"finite", fin}};
}

json to_json(const AxiomReport& r) {
    return {{"identity", r.identity}, {"inverse", r.inverse}, {"closure", r.closure}, {"passed", r.passed()}};
}

}  // namespace ndelie
