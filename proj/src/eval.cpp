#include "ndelie/eval.hpp"

#include <cmath>
#include <numbers>

namespace ndelie {

namespace {

double param_value(const Expr& e, const EvalEnv& env) {
    if (e.binding()) return e.binding()->get_d();
    auto it = env.params.find(e.name());
    if (it != env.params.end()) return it->second;
    if (e.name() == "pi") return std::numbers::pi;
    throw UnboundAtom("unbound parameter " + e.name());
}

double jet_value(Jet j, const EvalEnv& env) {
    const auto& v = env.jets[int(j)];
    if (!v) throw UnboundAtom("unbound jet variable " + jet_name(j));
    return *v;
}

double delay_value(const EvalEnv& env) {
    auto it = env.params.find("r");
    if (it == env.params.end()) throw UnboundAtom("unbound delay r");
    return it->second;
}

double fn_value(const FnAtom& f, const EvalEnv& env) {
    double t = jet_value(Jet::T, env);
    if (f.delayed) t -= delay_value(env);
    if (!env.fns) throw UnboundAtom("no function table for " + f.name);
    if (f.field) {
        auto it = env.fns->fields.find(f.name);
        if (it == env.fns->fields.end()) throw UnboundAtom("unbound field " + f.name);
        double x = jet_value(f.delayed ? Jet::XR : Jet::X, env);
        return it->second(t, x, f.dt, f.dx);
    }
    auto it = env.fns->coeffs.find(f.name);
    if (it == env.fns->coeffs.end()) throw UnboundAtom("unbound function " + f.name);
    return it->second(t, f.dt);
}

}  // namespace

double eval_numeric(const Expr& e, const EvalEnv& env) {
    switch (e.kind()) {
        case Expr::Kind::Constant: return e.value().get_d();
        case Expr::Kind::Param: return param_value(e, env);
        case Expr::Kind::JetVar: return jet_value(e.jet_tag(), env);
        case Expr::Kind::Fn: return fn_value(e.fn_atom(), env);
        case Expr::Kind::Sum: {
            double s = 0;
            for (const auto& a : e.operands()) s += eval_numeric(a, env);
            return s;
        }
        case Expr::Kind::Product: {
            double p = 1;
            for (const auto& a : e.operands()) p *= eval_numeric(a, env);
            return p;
        }
        case Expr::Kind::Power: {
            double b = eval_numeric(e.operands()[0], env);
            int n = e.exponent();
            if (n < 0 && b == 0) throw DomainError("division by zero");
            return std::pow(b, n);
        }
        case Expr::Kind::Apply: {
            double u = eval_numeric(e.operands()[0], env);
            switch (e.elementary()) {
                case Elementary::Sin: return std::sin(u);
                case Elementary::Cos: return std::cos(u);
                case Elementary::Exp: return std::exp(u);
                case Elementary::Ln:
                    if (u <= 0) throw DomainError("ln of nonpositive argument");
                    return std::log(u);
                case Elementary::Sqrt:
                    if (u < 0) throw DomainError("sqrt of negative argument");
                    return std::sqrt(u);
            }
        }
    }
    return 0;
}

double eval_at(const Expr& e, double t, const std::map<std::string, double>& params, const FnTable* fns) {
    EvalEnv env;
    env.set(Jet::T, t);
    env.params = params;
    env.fns = fns;
    return eval_numeric(e, env);
}

}  // namespace ndelie
