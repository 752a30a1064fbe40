#include "ndelie/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/SVD>
#include <boost/math/quadrature/gauss_kronrod.hpp>


namespace ndelie {

using nlohmann::json;

std::string case_name(CaseId c) { return "C" + std::to_string(int(c)); }

std::optional<CaseId> parse_case(const std::string& s) {
    if (s.size() < 2 || (s[0] != 'C' && s[0] != 'c')) return std::nullopt;
    try {
        int n = std::stoi(s.substr(1));
        if (n >= 1 && n <= 12) return CaseId(n);
    } catch (const std::exception&) {
    }
    return std::nullopt;
}

std::string kind_name(Generator::Kind k) {
    switch (k) {
        case Generator::Kind::Closed: return "closed";
        case Generator::Kind::Parametric: return "parametric";
        case Generator::Kind::Numeric: return "numeric";
    }
    return "?";
}

std::string status_name(Generator::Status s) { return s == Generator::Status::Admitted ? "admitted" : "candidate"; }

std::string Generator::render() const {
    std::string out;
    if (!omega.is_zero_literal()) out = "(" + omega.str() + ")*d/dt";
    if (!upsilon.is_zero_literal()) out += (out.empty() ? "" : " + ") + ("(" + upsilon.str() + ")*d/dx");
    return out.empty() ? "0" : out;
}

std::vector<const Generator*> ClassificationResult::admitted() const {
    std::vector<const Generator*> out;
    for (const auto& g : generators)
        if (g.status == Generator::Status::Admitted) out.push_back(&g);
    return out;
}

// ---------------------------------------------------------------- coefficient helpers

CoeffCallable coefficient_callable(const NdeSpec& spec, char slot) {
    const CoeffDescriptor& c = spec.slot(slot);
    std::map<std::string, double> params = spec.numeric_params();
    switch (c.kind) {
        case CoeffDescriptor::Kind::Zero: return [](double, int) { return 0.0; };
        case CoeffDescriptor::Kind::Numeric: {
            auto f = c.table;
            return [f](double t, int k) { return (*f)(t, k); };
        }
        default: break;
    }
    std::vector<Expr> ds{c.expr};
    for (int i = 0; i < 3; ++i) ds.push_back(diff(ds.back(), Jet::T));
    return [ds, params](double t, int k) {
        if (k < int(ds.size())) return eval_at(ds[size_t(k)], t, params);
        Expr e = ds.back();
        for (int i = int(ds.size()) - 1; i < k; ++i) e = diff(e, Jet::T);
        return eval_at(e, t, params);
    };
}

SampleOptions sample_window(const NdeSpec& spec, double span) {
    SampleOptions o;
    double r = spec.r.symbolic ? 0.8731 : spec.r.value();
    double lo = spec.t0 + r, hi = lo + span;
    if (spec.t_end && *spec.t_end > lo + 0.5) hi = std::min(hi, *spec.t_end);
    for (const char* p = NdeSpec::kSlots; *p; ++p) {
        const auto& s = spec.slot(*p);
        if (s.kind != CoeffDescriptor::Kind::Numeric) continue;
        lo = std::max(lo, s.table->lo() + r);
        hi = std::min(hi, s.table->hi());
    }
    o.t_lo = lo;
    o.t_hi = std::max(hi, lo);
    o.delay = r;
    return o;
}

namespace {

Expr dtn(Expr e, int n) {
    for (int i = 0; i < n; ++i) e = diff(e, Jet::T);
    return e;
}

Rational approx(double v) {
    Rational q(std::lround(v * 1e9), 1000000000);
    q.canonicalize();
    return q;
}

/// Sampled values of e over the window; DomainError points are skipped.
std::vector<double> sample_values(const Expr& e, const SampleOptions& o, const FnTable* fns, int n = 64) {
    std::vector<double> out;
    std::map<std::string, double> params{{"r", o.delay.value_or(0.8731)}};
    for (int i = 0; i < n; ++i) {
        double t = o.t_lo + (o.t_hi - o.t_lo) * (i + 0.5) / n;
        try {
            double v = eval_at(e, t, params, fns);
            if (std::isfinite(v)) out.push_back(v);
        } catch (const DomainError&) {
        }
    }
    return out;
}

bool closed_constant(const Expr& e, const SampleOptions& o) {
    if (normalize(e).is_constant()) return true;
    return is_zero(diff(e, Jet::T), {}, o).zero;
}

bool descriptor_constant(const CoeffDescriptor& c, const SampleOptions& o) {
    switch (c.kind) {
        case CoeffDescriptor::Kind::Zero:
        case CoeffDescriptor::Kind::Constant: return true;
        case CoeffDescriptor::Kind::Closed: return closed_constant(c.expr, o);
        case CoeffDescriptor::Kind::Numeric: {
            double scale = 0, dev = 0;
            for (int i = 0; i < 64; ++i) {
                double t = c.table->lo() + (c.table->hi() - c.table->lo()) * (i + 0.5) / 64;
                scale = std::max(scale, std::abs((*c.table)(t, 0)));
                dev = std::max(dev, std::abs((*c.table)(t, 1)));
            }
            return dev < 1e-9 * (1 + scale);
        }
    }
    return false;
}

bool constant_one(const CoeffDescriptor& c) {
    return c.kind == CoeffDescriptor::Kind::Constant && c.expr.is_constant() && c.expr.value() == 1;
}

bool closed_proportional(const CoeffDescriptor& c, const Expr& f, const SampleOptions& o) {
    if (c.kind != CoeffDescriptor::Kind::Closed) return false;
    try {
        return is_zero(diff(normalize(c.expr * pow(f, -1)), Jet::T), {}, o).zero;
    } catch (const SymbolicError&) {
        return false;
    }
}

}  // namespace

std::optional<CaseId> case_of(const NdeSpec& spec, std::vector<std::string>* trace) {
    auto note = [&](const std::string& s) {
        if (trace) trace->push_back(s);
    };
    SampleOptions o = sample_window(spec);
    bool kz = spec.k.is_zero(), bz = spec.b.is_zero(), dz = spec.d.is_zero();
    note("k = " + spec.k.describe("k") + (kz ? ": zero" : ": nonzero"));
    if (!kz) {
        bool kc = descriptor_constant(spec.k, o);
        note(std::string("k ") + (kc ? "constant" : "nonconstant"));
        if (!kc) {
            note("nonconstant k: the x2r row omega*k' = 0 forces omega = 0");
            return CaseId::C1;
        }
    }
    note("b = " + spec.b.describe("b") + (bz ? ": zero" : ": nonzero"));
    note("d = " + spec.d.describe("d") + (dz ? ": zero" : ": nonzero"));
    if (kz) {
        if (!bz && !dz) return CaseId::C10;
        if (!bz) return CaseId::C11;
        if (!dz) return CaseId::C12;
        note("b = d = k = 0: ordinary equation");
        return std::nullopt;
    }
    if (!bz && !dz) return CaseId::C2;
    if (!bz) {
        bool one = constant_one(spec.k);
        note(one ? "k = 1" : "k != 1");
        return one ? CaseId::C4 : CaseId::C3;
    }
    if (dz) {
        note("b = d = 0 with constant k: handled as the degenerate d = 0 member of the constant-d case");
        return CaseId::C9;
    }
    if (descriptor_constant(spec.d, o)) {
        note("d constant");
        return CaseId::C9;
    }
    if (closed_proportional(spec.d, exp(Expr::t()), o)) {
        note("d proportional to exp(t)");
        return CaseId::C6;
    }
    if (closed_proportional(spec.d, sin(Expr::t()), o)) {
        note("d proportional to sin(t)");
        return CaseId::C7;
    }
    if (spec.d.kind == CoeffDescriptor::Kind::Closed) {
        try {
            Expr m = normalize(Expr::t() * diff(spec.d.expr, Jet::T) * pow(spec.d.expr, -1));
            if (closed_constant(m, o)) {
                note("d a power of t");
                return CaseId::C8;
            }
        } catch (const SymbolicError&) {
        }
    }
    note("d general");
    return CaseId::C5;
}

// ---------------------------------------------------------------- omega equations

OmegaSolution omega_ode_solve(OmegaEq eq, const OmegaParams& p, const std::array<double, 3>& init,
                              const std::vector<double>& grid) {
    if (grid.size() < 2) throw std::invalid_argument("omega_ode_solve needs at least two grid points");
    bool divides = eq == OmegaEq::OmegaB || eq == OmegaEq::OmegaBUnit || eq == OmegaEq::OmegaDIntegral || eq == OmegaEq::OmegaCIntegral;
    if (divides && std::abs(init[0]) < 1e-12) throw std::invalid_argument("omega(t0) = 0 for a form dividing by omega");
    double c2 = eq == OmegaEq::OmegaBUnit ? 1.0 : p.c2, c3 = eq == OmegaEq::OmegaBUnit ? 1.0 : p.c3;
    bool second = eq == OmegaEq::OmegaDIntegral || eq == OmegaEq::OmegaCIntegral;
    double t0 = grid.front();

    auto first_integral_value = [&](double t, double w, double w1, double w2) {
        if (eq == OmegaEq::OmegaCIntegral) return w * w2 - w1 * w1 / 2 + 2 * p.c(t, 0) * w * w;
        return c2 * w * w2 - c2 * w1 * w1 / 2 + 2 * w * w * p.d(t, 0);
    };
    double C = 0;
    if (second || eq == OmegaEq::OmegaD) C = first_integral_value(t0, init[0], init[1], init[2]);

    auto w2_of = [&](double t, double w, double w1) {
        if (eq == OmegaEq::OmegaCIntegral) return (C + w1 * w1 / 2 - 2 * p.c(t, 0) * w * w) / w;
        return (C + c2 * w1 * w1 / 2 - 2 * w * w * p.d(t, 0)) / (c2 * w);
    };
    auto w3_of = [&](double t, double w, double w1, double w2) {
        switch (eq) {
            case OmegaEq::OmegaB:
            case OmegaEq::OmegaBUnit: return -c3 * w2 / (c2 * w);
            case OmegaEq::OmegaD:
            case OmegaEq::OmegaDIntegral: return -(2 * p.d(t, 1) * w + 4 * p.d(t, 0) * w1) / c2;
            case OmegaEq::OmegaCIntegral: return -(2 * p.c(t, 1) * w + 4 * p.c(t, 0) * w1);
        }
        return 0.0;
    };
    using State = std::array<double, 3>;
    auto rhs = [&](double t, const State& y) -> State {
        if (second) return {y[1], w2_of(t, y[0], y[1]), 0};
        return {y[1], y[2], w3_of(t, y[0], y[1], y[2])};
    };

    OmegaSolution out;
    std::vector<double> nodes;
    std::vector<std::vector<double>> vals;
    State y = init;
    auto record = [&](double t) {
        double w2 = second ? w2_of(t, y[0], y[1]) : y[2];
        nodes.push_back(t);
        vals.push_back({y[0], y[1], w2, w3_of(t, y[0], y[1], w2)});
        if (second || eq == OmegaEq::OmegaD) {
            double drift = std::abs(first_integral_value(t, y[0], y[1], w2) - C) / std::max(1.0, std::abs(C));
            out.invariant_drift = std::max(out.invariant_drift, drift);
        }
    };
    record(t0);
    const int sub = 4;
    for (size_t i = 0; i + 1 < grid.size(); ++i) {
        double h = (grid[i + 1] - grid[i]) / sub, t = grid[i];
        for (int s = 0; s < sub; ++s) {
            State k1 = rhs(t, y), tmp;
            for (int j = 0; j < 3; ++j) tmp[j] = y[j] + h / 2 * k1[j];
            State k2 = rhs(t + h / 2, tmp);
            for (int j = 0; j < 3; ++j) tmp[j] = y[j] + h / 2 * k2[j];
            State k3 = rhs(t + h / 2, tmp);
            for (int j = 0; j < 3; ++j) tmp[j] = y[j] + h * k3[j];
            State k4 = rhs(t + h, tmp);
            for (int j = 0; j < 3; ++j) y[j] += h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
            t += h;
        }
        if (divides && std::abs(y[0]) < 1e-8 * std::max(1.0, std::abs(init[0]))) {
            out.truncated = true;
            out.warning = "omega reaches 0 near t = " + std::to_string(grid[i + 1]) + "; solution truncated";
            break;
        }
        if (!std::isfinite(y[0])) {
            out.truncated = true;
            out.warning = "omega diverges near t = " + std::to_string(grid[i + 1]) + "; solution truncated";
            break;
        }
        record(grid[i + 1]);
    }
    if (nodes.size() < 2) throw std::runtime_error("omega solution truncated at its first step: " + out.warning);
    out.table = std::make_shared<NumericFunction>(std::move(nodes), std::move(vals));
    return out;
}

CompatibleC compatibility_c(const Expr& omega, const FnTable* fns, std::optional<double> c_t0, double t0) {
    CompatibleC out;
    Expr w = normalize(omega);
    if (w.is_zero_literal()) return out;
    Expr w1 = diff(w, Jet::T), w2 = diff(w1, Jet::T);
    out.closed = normalize((Expr::param("K") + Expr(Rational(1, 2)) * pow(w1, 2) - w * w2) * pow(Expr(2) * pow(w, 2), -1));
    std::vector<FnAtom> atoms;
    fn_atoms(w, atoms);
    bool numeric = fns && std::any_of(atoms.begin(), atoms.end(), [&](const FnAtom& f) { return fns->has(f.name); });
    out.kind = numeric ? CompatibleC::Kind::Numeric : CompatibleC::Kind::Closed;
    if (c_t0) {
        double W = eval_at(w, t0, {}, fns), W1 = eval_at(w1, t0, {}, fns), W2 = eval_at(w2, t0, {}, fns);
        out.K = 2 * *c_t0 * W * W + W * W2 - W1 * W1 / 2;
    }
    Expr closed = out.closed;
    double K = out.K;
    FnTable table = fns ? *fns : FnTable{};
    out.numeric = [closed, K, table](double t) { return eval_at(closed, t, {{"K", K}}, &table); };
    return out;
}

// ---------------------------------------------------------------- reductions

Homogenized homogenize(const NdeSpec& spec, const Expr& particular, const FnTable& bindings) {
    Homogenized out;
    out.spec = spec;
    out.particular = normalize(particular);
    out.bindings = bindings;
    if (spec.h.is_zero()) return out;
    Expr p = out.particular, p1 = diff(p, Jet::T), p2 = diff(p1, Jet::T);
    Substitution s;
    s.jets[Jet::X] = p;
    s.jets[Jet::X1] = p1;
    s.jets[Jet::X2] = p2;
    s.jets[Jet::XR] = shift(p);
    s.jets[Jet::X1R] = shift(p1);
    s.jets[Jet::X2R] = shift(p2);
    Expr res = bind_delay(substitute(spec.equation().delta, s), spec);
    FnTable fns = spec.functions();
    fns.merge(bindings);
    SampleOptions o = sample_window(spec);
    o.fns = &fns;
    o.tol = 1e-6;
    auto z = is_zero(res, {}, o);
    out.residual = z.max_abs;
    if (!z.zero) throw SpecError("particular solution fails the equation (residual " + std::to_string(z.max_abs) + ")");
    out.spec.h = CoeffDescriptor::zero();
    return out;
}

namespace {

/// Antiderivative from t = 0 of a polynomial in t, or nullopt.
std::optional<Expr> polynomial_antiderivative(const Expr& a) {
    try {
        auto parts = collect(a, {Jet::T});
        Expr out;
        for (const auto& [m, c] : parts) {
            if (!normalize(c).is_constant() && !c.is_zero_literal()) return std::nullopt;
            int n = m[size_t(Jet::T)];
            out = out + c * pow(Expr::t(), n + 1) * Expr(Rational(1, n + 1));
        }
        return normalize(out);
    } catch (const SymbolicError&) {
        return std::nullopt;
    }
}

/// Five-point derivatives of a smooth callable.
double fd(const std::function<double(double)>& f, double t, int order) {
    const double h = 2e-3;
    switch (order) {
        case 0: return f(t);
        case 1: return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h);
        case 2: return (-f(t - 2 * h) + 16 * f(t - h) - 30 * f(t) + 16 * f(t + h) - f(t + 2 * h)) / (12 * h * h);
        default: return (-f(t - 2 * h) + 2 * f(t - h) - 2 * f(t + h) + f(t + 2 * h)) / (-2 * h * h * h);
    }
}

}  // namespace

FirstDerivativeRemoval remove_first_derivative(const NdeSpec& spec) {
    FirstDerivativeRemoval out;
    out.spec = spec;
    out.s = Expr(1);
    if (spec.a.is_zero()) return out;
    out.spec.a = CoeffDescriptor::zero();

    std::optional<Expr> A;
    if (spec.a.kind != CoeffDescriptor::Kind::Numeric) A = polynomial_antiderivative(spec.a.expr);
    if (A) {
        Expr s = normalize(exp(Expr(Rational(-1, 2)) * *A));
        Expr s1 = diff(s, Jet::T), s2 = diff(s1, Jet::T);
        Expr sr = shift(s), s1r = shift(s1), s2r = shift(s2);
        Expr inv = pow(s, -1);
        Expr a = spec.a.expr, b = spec.b.symbolic("b"), c = spec.c.symbolic("c"), d = spec.d.symbolic("d"),
             k = spec.k.symbolic("k"), h = spec.h.symbolic("h");
        auto mk = [&](const Expr& e) {
            Expr n = bind_delay(e, spec);
            return n.is_zero_literal() ? CoeffDescriptor::zero() : CoeffDescriptor::closed(n);
        };
        out.spec.b = mk((b * sr + Expr(2) * k * s1r) * inv);
        out.spec.c = mk((s2 + a * s1 + c * s) * inv);
        out.spec.d = mk((b * s1r + d * sr + k * s2r) * inv);
        out.spec.k = mk(k * sr * inv);
        out.spec.h = mk(h * inv);
        out.s = s;
        out.closed = true;
        return out;
    }

    // numeric s(t) = exp(-1/2 int_{t0}^t a)
    out.closed = false;
    CoeffCallable a = coefficient_callable(spec, 'a');
    double t0 = spec.t0, r = spec.r.value();
    auto S = [a, t0](double t, int order) {
        double I = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [&](double u) { return a(u, 0); }, t0, t, 8, 1e-13);
        double s = std::exp(-I / 2), a0 = a(t, 0);
        switch (order) {
            case 0: return s;
            case 1: return -a0 / 2 * s;
            case 2: return (a0 * a0 / 4 - a(t, 1) / 2) * s;
            default: return (0.75 * a0 * a(t, 1) - a(t, 2) / 2 - a0 * a0 * a0 / 8) * s;
        }
    };
    double lo = t0 - r, hi = (spec.t_end ? *spec.t_end : t0 + 10) + 1;
    std::vector<double> nodes;
    for (double t = lo; t <= hi + 1e-12; t += 0.02) nodes.push_back(t);
    auto tabulate = [&](const std::function<double(double)>& f) {
        std::vector<std::vector<double>> vals;
        for (double t : nodes) vals.push_back({fd(f, t, 0), fd(f, t, 1), fd(f, t, 2), fd(f, t, 3)});
        return std::make_shared<NumericFunction>(nodes, vals);
    };
    {
        std::vector<std::vector<double>> vals;
        for (double t : nodes) vals.push_back({S(t, 0), S(t, 1), S(t, 2), S(t, 3)});
        auto st = std::make_shared<NumericFunction>(nodes, vals);
        out.bindings.coeffs["s"] = [st](double t, int k) { return (*st)(t, k); };
    }
    auto bf = coefficient_callable(spec, 'b'), cf = coefficient_callable(spec, 'c'), df = coefficient_callable(spec, 'd'),
         kf = coefficient_callable(spec, 'k'), hf = coefficient_callable(spec, 'h');
    auto numeric_or_zero = [&](bool zero, const std::function<double(double)>& f) {
        return zero ? CoeffDescriptor::zero() : CoeffDescriptor::numeric(tabulate(f));
    };
    // nodes below t0 use s at t - r < lo; the formulas only need t >= lo + r
    nodes.erase(nodes.begin(), std::find_if(nodes.begin(), nodes.end(), [&](double t) { return t >= lo + r + 0.01; }));
    out.spec.b = numeric_or_zero(spec.b.is_zero() && spec.k.is_zero(), [&](double t) {
        return (bf(t, 0) * S(t - r, 0) + 2 * kf(t, 0) * S(t - r, 1)) / S(t, 0);
    });
    out.spec.c = numeric_or_zero(false, [&](double t) {
        return (S(t, 2) + a(t, 0) * S(t, 1) + cf(t, 0) * S(t, 0)) / S(t, 0);
    });
    out.spec.d = numeric_or_zero(spec.b.is_zero() && spec.d.is_zero() && spec.k.is_zero(), [&](double t) {
        return (bf(t, 0) * S(t - r, 1) + df(t, 0) * S(t - r, 0) + kf(t, 0) * S(t - r, 2)) / S(t, 0);
    });
    out.spec.k = numeric_or_zero(spec.k.is_zero(), [&](double t) { return kf(t, 0) * S(t - r, 0) / S(t, 0); });
    out.spec.h = numeric_or_zero(spec.h.is_zero(), [&](double t) { return hf(t, 0) / S(t, 0); });
    out.s = Expr::fn("s");
    return out;
}

// ---------------------------------------------------------------- classification

namespace {

struct Builder {
    const NdeSpec& spec;
    const ClassifyOptions& opts;
    ClassificationResult& res;
    FnTable spec_fns;
    SampleOptions window;

    Builder(const NdeSpec& s, const ClassifyOptions& o, ClassificationResult& r)
        : spec(s), opts(o), res(r), spec_fns(s.functions()), window(sample_window(s)) {
        window.fns = &spec_fns;
    }

    Expr b() const { return spec.b.symbolic("b"); }
    Expr c() const { return spec.c.symbolic("c"); }
    Expr d() const { return spec.d.symbolic("d"); }
    Expr k() const { return spec.k.symbolic("k"); }

    void add(std::string label, const Expr& omega, const Expr& upsilon, std::string note,
             Generator::Kind kind = Generator::Kind::Closed) {
        Generator g;
        g.label = std::move(label);
        g.omega = normalize(omega);
        g.upsilon = normalize(upsilon);
        g.kind = kind;
        g.note = std::move(note);
        res.generators.push_back(std::move(g));
    }
    /// omega d/dt + (omega'/2) x d/dx
    void add_omega(std::string label, const Expr& omega, std::string note) {
        Expr w = normalize(omega);
        add(std::move(label), w, Expr(Rational(1, 2)) * diff(w, Jet::T) * Expr::x(), std::move(note));
    }
    void add_scaling(std::string label, const Rational& q) {
        add(std::move(label), Expr(), Expr(q) * Expr::x(), q == 1 ? "c1 = 2" : "c1 = 1");
    }
    void add_rho(std::string label) {
        add(std::move(label), Expr(), Expr::fn("rho"), "rho: any solution of the homogeneous equation",
            Generator::Kind::Parametric);
    }

    /// Records whether K(t) is constant on the window.
    void constant_check(std::string name, std::string formula, const Expr& K) {
        Compatibility c;
        c.name = std::move(name);
        c.formula = std::move(formula);
        auto vals = sample_values(K, window, &spec_fns);
        if (vals.empty()) {
            c.satisfied = false;
            c.note = "not evaluable on the sample window";
        } else {
            auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
            c.deviation = *mx - *mn;
            double scale = std::max(1.0, std::max(std::abs(*mn), std::abs(*mx)));
            c.satisfied = c.deviation < 1e-8 * scale;
            std::ostringstream os;
            os.precision(10);
            os << "value " << vals.front();
            c.note = os.str();
        }
        if (!c.satisfied) res.warnings.push_back("compatibility '" + c.name + "' not met (spread " + std::to_string(c.deviation) + ")");
        res.compatibility.push_back(std::move(c));
    }

    void zero_check(std::string name, std::string formula, const Expr& E) {
        Compatibility c;
        c.name = std::move(name);
        c.formula = std::move(formula);
        auto z = is_zero(E, {}, window);
        c.satisfied = z.zero;
        c.deviation = z.max_abs;
        c.note = z.method();
        if (!c.satisfied) res.warnings.push_back("compatibility '" + c.name + "' not met (max " + std::to_string(c.deviation) + ")");
        res.compatibility.push_back(std::move(c));
    }

    void delay_check(char slot) {
        const CoeffDescriptor& cd = spec.slot(slot);
        if (cd.kind == CoeffDescriptor::Kind::Zero || cd.kind == CoeffDescriptor::Kind::Constant) return;
        std::string n(1, slot);
        Expr f = cd.symbolic(n);
        zero_check(n + " periodic", n + "(t) = " + n + "(t-r)", bind_delay(f - shift(f), spec));
    }

    void sign_check(char slot, bool positive) {
        const CoeffDescriptor& cd = spec.slot(slot);
        std::string n(1, slot);
        auto vals = sample_values(cd.symbolic(n), window, &spec_fns, 256);
        bool bad = std::any_of(vals.begin(), vals.end(), [&](double v) { return positive ? v <= 0 : v == 0; });
        if (!vals.empty()) {
            auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
            if (!positive && *mn < 0 && *mx > 0) bad = true;
        }
        if (bad) res.warnings.push_back(n + "(t) " + (positive ? "is not positive" : "vanishes") + " on the sample window");
    }

    void verify(Generator& g) {
        FnTable fns = spec_fns;
        fns.merge(g.bindings);
        SampleOptions o = window;
        o.fns = &fns;
        if (g.kind == Generator::Kind::Numeric) {
            o.tol = opts.numeric_tol;
            for (const auto& t : g.tables) {
                o.t_lo = std::max(o.t_lo, t->lo() + *o.delay);
                o.t_hi = std::min(o.t_hi, t->hi());
            }
        }
        Expr z = invariance_residual(spec, g.ansatz());
        auto zt = is_zero(z, res.assumptions, o);
        // omega(t) = omega(t-r) is not visible in the operator residual
        auto zd = is_zero(bind_delay(g.omega - shift(g.omega), spec), {}, o);
        if (!zd.zero) {
            zt.zero = false;
            res.warnings.push_back(g.label + ": omega(t) != omega(t-r) (max " + std::to_string(zd.max_abs) + ")");
        }
        g.check_residual = std::max(zt.max_abs, zd.max_abs);
        std::string how = zt.symbolic ? "symbolic zero" : "sampled " + std::to_string(zt.samples) + " points";
        if (zt.zero) {
            g.note += (g.note.empty() ? "" : "; ") + ("invariance: " + how);
        } else {
            if (g.status == Generator::Status::Admitted)
                res.warnings.push_back(g.label + " fails the invariance check (max residual " + std::to_string(g.check_residual) +
                                       "); demoted to candidate");
            g.status = Generator::Status::Candidate;
        }
    }
};

double value_of(const NdeSpec& spec, char slot) {
    return coefficient_callable(spec, slot)(spec.t0 + 1, 0);
}

void build_b_branch(Builder& B, CaseId id) {
    Expr b = B.b(), w = pow(b, -1);
    B.res.trace.push_back("x1r row integrates to omega = c3/b(t); c3 = 1");
    bool k1 = id == CaseId::C4;
    if (k1) B.add_scaling("zeta1", Rational(1, 2));
    else B.add_scaling("zeta1", 1);
    B.add_omega("zeta2", w, "omega = 1/b, c3 = 1");
    B.add_rho("zeta3");
    B.delay_check('b');
    B.sign_check('b', false);

    Expr bp = diff(b, Jet::T), bpp = diff(bp, Jet::T);
    Expr ratio = bp * pow(b, -1);
    // c from the x row with omega = 1/b
    B.constant_check("c(t)", "c = 1/2*(b''/b - 3/2*(b'/b)^2 + c6/2*b^2)",
                     normalize((Expr(2) * B.c() - bpp * pow(b, -1) + Expr(Rational(3, 2)) * pow(ratio, 2)) * pow(b, -2)));
    switch (id) {
        case CaseId::C2: {
            Expr c2 = B.k();
            B.constant_check("d(t)", "d = K*b^2 + b'/2 + c2/2*(b''/b - 3/2*(b'/b)^2)",
                             normalize((B.d() - Expr(Rational(1, 2)) * bp -
                                        Expr(Rational(1, 2)) * c2 * (bpp * pow(b, -1) - Expr(Rational(3, 2)) * pow(ratio, 2))) *
                                       pow(b, -2)));
            break;
        }
        case CaseId::C10:
            B.constant_check("d(t)", "d = c32*b^2 + b'/2",
                             normalize((B.d() - Expr(Rational(1, 2)) * bp) * pow(b, -2)));
            break;
        case CaseId::C3:
        case CaseId::C4: {
            Expr c2 = B.k();
            B.zero_check("omega = 1/b solves c2*omega*omega''' + c3*omega'' = 0", "c2*omega*omega''' + omega'' = 0",
                         normalize(c2 * w * dtn(w, 3) + dtn(w, 2)));
            // reference integration of the third-order omega equation from the data of 1/b
            try {
                double t0 = B.spec.t0, r = *B.window.delay;
                std::vector<double> grid;
                for (int i = 0; i <= 400; ++i) grid.push_back(t0 + 2 * r * i / 400.0);
                OmegaParams p;
                p.c2 = value_of(B.spec, 'k');
                p.c3 = 1;
                std::array<double, 3> init{eval_at(w, t0, {}, &B.spec_fns), eval_at(diff(w, Jet::T), t0, {}, &B.spec_fns),
                                           eval_at(dtn(w, 2), t0, {}, &B.spec_fns)};
                auto sol = omega_ode_solve(id == CaseId::C4 ? OmegaEq::OmegaBUnit : OmegaEq::OmegaB, p, init, grid);
                double dev = 0;
                for (double t : sol.table->nodes()) dev = std::max(dev, std::abs((*sol.table)(t, 0) - eval_at(w, t, {}, &B.spec_fns)));
                Compatibility c;
                c.name = "omega equation from 1/b data";
                c.formula = id == CaseId::C4 ? "omega*omega''' + omega'' = 0" : "c2*omega*omega''' + omega'' = 0";
                c.deviation = dev;
                c.satisfied = dev < 1e-6;
                c.note = "RK4 solution compared with 1/b over two delays" + (sol.truncated ? "; " + sol.warning : "");
                B.res.compatibility.push_back(c);
            } catch (const std::exception& e) {
                B.res.warnings.push_back(std::string("omega equation integration failed: ") + e.what());
            }
            break;
        }
        case CaseId::C11:
            B.constant_check("b constant", "b'(t) = 0 (omega constant and periodic)", b);
            B.constant_check("c constant", "c = c36/c35^2", B.c());
            break;
        default: break;
    }
}

void build_c9(Builder& B) {
    const NdeSpec& s = B.spec;
    if (s.d.is_zero()) {
        B.res.trace.push_back("d = 0: omega''' = 0, omega in span{1, t, t^2}");
        B.add_omega("zeta1", Expr(1), "omega = 1");
        B.add_scaling("zeta2", 1);
        B.add_omega("zeta3", Expr::t(), "omega = t");
        B.add_omega("zeta4", pow(Expr::t(), 2), "omega = t^2");
        B.add_rho("zeta5");
        B.constant_check("c constant", "c'(t) = 0 for omega = 1", B.c());
        return;
    }
    Expr q = normalize(B.d() * pow(B.k(), -1));
    B.add_omega("zeta1", Expr(1), "omega = 1");
    B.add_scaling("zeta2", Rational(1, 2));
    bool exact = q.is_constant();
    double qv = exact ? q.value().get_d() : eval_at(q, s.t0 + 1, s.numeric_params(), &B.spec_fns);
    Expr Om;
    if (qv > 0) {
        Om = exact ? normalize(Expr(2) * sqrt(q)) : Expr(approx(2 * std::sqrt(qv)));
        B.res.trace.push_back("c2*omega''' + 4*d*omega' = 0 with d/c2 > 0: omega in span{1, sin(W t), cos(W t)}, W = " + Om.str());
        B.add_omega("zeta3", sin(Om * Expr::t()), "omega = sin(W t)");
        B.add_omega("zeta4", cos(Om * Expr::t()), "omega = cos(W t)");
        B.zero_check("delay resonance", "W*r in 2*pi*Z", bind_delay(sin(Om * Expr::delay()) * sin(Om * Expr::delay()) +
                                                                      pow(cos(Om * Expr::delay()) - Expr(1), 2), s));
    } else {
        Om = exact ? normalize(Expr(2) * sqrt(-q)) : Expr(approx(2 * std::sqrt(-qv)));
        B.res.trace.push_back("d/c2 < 0: omega in span{1, exp(W t), exp(-W t)}, W = " + Om.str());
        B.add_omega("zeta3", exp(Om * Expr::t()), "omega = exp(W t)");
        B.add_omega("zeta4", exp(-Om * Expr::t()), "omega = exp(-W t)");
    }
    B.add_rho("zeta5");
    B.constant_check("c constant", "c'(t) = 0 for omega = 1", B.c());
    B.zero_check("c for the oscillating pair", "c = d/c2", normalize(B.c() - q));
}

void build_numeric_omega(Builder& B, CaseId id) {
    const NdeSpec& s = B.spec;
    double r = *B.window.delay;
    double t_first = s.t0 - 2 * r;
    double t_last = (s.t_end ? *s.t_end : s.t0 + 4 * r) + 2 * r;
    int per = B.opts.omega_steps_per_delay;
    double h = r / per;
    std::vector<double> grid;
    for (int i = 0;; ++i) {
        double t = t_first + i * h;
        grid.push_back(t);
        if (t >= t_last) break;
    }
    OmegaParams p;
    p.c2 = value_of(s, 'k');
    p.d = coefficient_callable(s, 'd');
    B.res.trace.push_back("b = 0: c2*omega''' + 2*d'*omega + 4*d*omega' = 0 solved from three unit initial conditions at t = " +
                          std::to_string(t_first));

    std::array<OmegaSolution, 3> basis;
    Eigen::Matrix3d M;
    for (int i = 0; i < 3; ++i) {
        std::array<double, 3> init{0, 0, 0};
        init[size_t(i)] = 1;
        basis[size_t(i)] = omega_ode_solve(OmegaEq::OmegaD, p, init, grid);
        const auto& v = basis[size_t(i)].table->values()[size_t(per)];
        for (int j = 0; j < 3; ++j) M(j, i) = v[size_t(j)];
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(M - Eigen::Matrix3d::Identity(), Eigen::ComputeFullV);
    auto sv = svd.singularValues();
    Eigen::Matrix3d V = svd.matrixV();
    double smax = std::max(1.0, sv(0));
    {
        std::ostringstream os;
        os.precision(3);
        os << "monodromy - I singular values: " << sv(0) << ", " << sv(1) << ", " << sv(2);
        B.res.trace.push_back(os.str());
    }

    int n = 0;
    for (int col = 0; col < 3; ++col) {
        Eigen::Vector3d v = V.col(col);
        int lead = 0;
        for (int j = 0; j < 3; ++j)
            if (std::abs(v(j)) > 1e-12) {
                lead = j;
                break;
            }
        if (v(lead) < 0) v = -v;
        bool periodic = sv(col) < B.opts.null_tol * smax;
        // combining the basis tables loses digits to the growing mode, so each
        // combination is integrated as its own trajectory
        std::shared_ptr<NumericFunction> table;
        std::array<double, 3> init{v(0), v(1), v(2)};
        if (periodic) {
            std::vector<double> period(grid.begin(), grid.begin() + per + 1);
            auto one = omega_ode_solve(OmegaEq::OmegaD, p, init, period);
            std::vector<double> nodes;
            std::vector<std::vector<double>> vals;
            for (int cyc = 0; nodes.empty() || nodes.back() < t_last; ++cyc)
                for (int m = cyc ? 1 : 0; m <= per; ++m) {
                    nodes.push_back(t_first + cyc * r + m * h);
                    vals.push_back(one.table->values()[size_t(m)]);
                }
            table = std::make_shared<NumericFunction>(nodes, vals);
        } else {
            table = omega_ode_solve(OmegaEq::OmegaD, p, init, grid).table;
        }
        std::string name = "w" + std::to_string(++n);
        Generator g;
        g.label = "zeta" + std::to_string(n);
        g.omega = Expr::fn(name);
        g.upsilon = normalize(Expr(Rational(1, 2)) * Expr::fn(name, 1) * Expr::x());
        g.kind = Generator::Kind::Numeric;
        g.status = periodic ? Generator::Status::Admitted : Generator::Status::Candidate;
        std::ostringstream os;
        os.precision(4);
        os << name << " = " << v(0) << "*e1 + " << v(1) << "*e2 + " << v(2) << "*e3"
           << (periodic ? " (periodic: monodromy eigenvalue 1)" : " (not periodic)");
        g.note = os.str();
        g.bindings.coeffs[name] = [table](double t, int o) { return (*table)(t, o); };
        g.tables.push_back(table);
        if (periodic) {
            // c compatible with this omega: K = 2 c w^2 + w w'' - w'^2/2 constant
            FnTable fns = B.spec_fns;
            fns.merge(g.bindings);
            Expr W = Expr::fn(name);
            Expr K = normalize(Expr(2) * B.c() * pow(W, 2) + W * Expr::fn(name, 2) -
                               Expr(Rational(1, 2)) * pow(Expr::fn(name, 1), 2));
            Compatibility c;
            c.name = "c(t) for " + name;
            c.formula = "2*c*omega^2 + omega*omega'' - omega'^2/2 = K";
            SampleOptions o = B.window;
            o.t_lo = std::max(o.t_lo, table->lo() + r);
            o.t_hi = std::min(o.t_hi, table->hi());
            auto vals2 = sample_values(K, o, &fns);
            auto [mn, mx] = std::minmax_element(vals2.begin(), vals2.end());
            c.deviation = vals2.empty() ? 0 : *mx - *mn;
            double scale = vals2.empty() ? 1 : std::max({1.0, std::abs(*mn), std::abs(*mx)});
            c.satisfied = !vals2.empty() && c.deviation < 1e-6 * scale;
            if (!c.satisfied) B.res.warnings.push_back("compatibility '" + c.name + "' not met");
            B.res.compatibility.push_back(c);
        }
        B.res.generators.push_back(std::move(g));
    }
    B.add_scaling("zeta" + std::to_string(++n), Rational(1, 2));
    B.add_rho("zeta" + std::to_string(++n));
    B.delay_check('d');
    (void)id;
}

void build_c12(Builder& B) {
    Expr d = B.d();
    B.res.trace.push_back("k = b = 0: omega = sqrt(c37/d(t)); c37 = 1");
    B.add_omega("zeta1", pow(sqrt(d), -1), "omega = 1/sqrt(d), c37 = 1");
    B.add_scaling("zeta2", Rational(1, 2));
    B.add_rho("zeta3");
    B.sign_check('d', true);
    B.delay_check('d');
    Expr dp = diff(d, Jet::T), dpp = diff(dp, Jet::T);
    B.constant_check("c(t)", "c = 1/2*(c31/c37*d + d''/(2*d) - 5/8*(d'/d)^2)",
                     normalize((Expr(2) * B.c() - dpp * pow(Expr(2) * d, -1) +
                                Expr(Rational(5, 8)) * pow(dp * pow(d, -1), 2)) *
                               pow(d, -1)));
}

}  // namespace

ClassificationResult classify(const NdeSpec& input, const ClassifyOptions& opts) {
    ClassificationResult res;
    NdeSpec spec = input;
    if (!spec.a.is_zero()) {
        auto red = remove_first_derivative(spec);
        spec = red.spec;
        res.trace.push_back("a != 0: x = s(t)*u with s = " + (red.closed ? red.s.str() : std::string("exp(-1/2*int a) (numeric)")) +
                            " removes the first-derivative term");
        res.warnings.push_back("generators refer to u = x/s(t)");
    }
    if (!spec.h.is_zero()) {
        spec.h = CoeffDescriptor::zero();
        res.trace.push_back("h != 0: classified the associated homogeneous equation");
        res.warnings.push_back("generators act on x - x1(t) for a particular solution x1");
    }
    res.spec = spec;
    res.case_id = case_of(spec, &res.trace);
    if (!res.case_id) {
        res.out_of_taxonomy = "b = d = k = 0: the equation is an ordinary differential equation";
        return res;
    }
    res.trace.push_back("case " + case_name(*res.case_id));
    res.assumptions.push_back(Assumption::solves("rho", spec.equation().delta, "rho solves the homogeneous equation"));

    Builder B(spec, opts, res);
    switch (*res.case_id) {
        case CaseId::C1:
            B.add_scaling("zeta1", 1);
            B.add_rho("zeta2");
            break;
        case CaseId::C2:
        case CaseId::C3:
        case CaseId::C4:
        case CaseId::C10:
        case CaseId::C11: build_b_branch(B, *res.case_id); break;
        case CaseId::C5:
        case CaseId::C6:
        case CaseId::C7:
        case CaseId::C8: build_numeric_omega(B, *res.case_id); break;
        case CaseId::C9: build_c9(B); break;
        case CaseId::C12: build_c12(B); break;
    }
    for (auto& g : res.generators) B.verify(g);
    return res;
}

json to_json(const ClassificationResult& r) {
    json j;
    j["case"] = r.case_id ? json(case_name(*r.case_id)) : json(nullptr);
    if (!r.out_of_taxonomy.empty()) j["out_of_taxonomy"] = r.out_of_taxonomy;
    j["trace"] = r.trace;
    json gens = json::array();
    for (const auto& g : r.generators) {
        gens.push_back({{"label", g.label},
                        {"omega", g.omega.str()},
                        {"upsilon", g.upsilon.str()},
                        {"generator", g.render()},
                        {"kind", kind_name(g.kind)},
                        {"status", status_name(g.status)},
                        {"note", g.note},
                        {"check_residual", g.check_residual}});
    }
    j["generators"] = gens;
    json comp = json::array();
    for (const auto& c : r.compatibility)
        comp.push_back({{"name", c.name}, {"formula", c.formula}, {"satisfied", c.satisfied}, {"deviation", c.deviation}, {"note", c.note}});
    j["compatibility"] = comp;
    j["warnings"] = r.warnings;
    json as = json::array();
    for (const auto& a : r.assumptions) as.push_back(a.describe());
    j["assumptions"] = as;
    return j;
}

std::string render_text(const ClassificationResult& r) {
    std::ostringstream os;
    os << "case: " << (r.case_id ? case_name(*r.case_id) : std::string("out of taxonomy")) << "\n";
    if (!r.out_of_taxonomy.empty()) os << "  " << r.out_of_taxonomy << "\n";
    for (const auto& t : r.trace) os << "  * " << t << "\n";
    if (!r.generators.empty()) os << "generators:\n";
    for (const auto& g : r.generators)
        os << "  " << g.label << " [" << kind_name(g.kind) << ", " << status_name(g.status) << "] " << g.render() << "\n"
           << "      " << g.note << "\n";
    if (!r.compatibility.empty()) os << "compatibility:\n";
    for (const auto& c : r.compatibility)
        os << "  " << (c.satisfied ? "ok  " : "FAIL") << " " << c.name << ": " << c.formula << "  (" << c.note << ")\n";
    for (const auto& w : r.warnings) os << "warning: " << w << "\n";
    return os.str();
}

}  // namespace ndelie
