#include <algorithm>

#include "ndelie/expr.hpp"

namespace ndelie {

namespace {

Expr diff_raw(const Expr& e, DiffVar v);

Expr diff_fn(const FnAtom& f, DiffVar v) {
    using M = DiffVar::Mode;
    FnAtom g = f;
    switch (v.mode) {
        case M::TAll: g.dt += 1; break;
        case M::TNow:
            if (f.delayed) return Expr();
            g.dt += 1;
            break;
        case M::TDelayed:
            if (!f.delayed) return Expr();
            g.dt += 1;
            break;
        case M::JetVar:
            if (!f.field) return Expr();
            if (v.jet == Jet::X && !f.delayed) {
                g.dx += 1;
            } else if (v.jet == Jet::XR && f.delayed) {
                g.dx += 1;
            } else {
                return Expr();
            }
            break;
    }
    return Expr::fn(g);
}

Expr diff_raw(const Expr& e, DiffVar v) {
    using M = DiffVar::Mode;
    switch (e.kind()) {
        case Expr::Kind::Constant:
        case Expr::Kind::Param: return Expr();
        case Expr::Kind::JetVar:
            if (e.jet_tag() == Jet::T) return (v.mode == M::TAll || v.mode == M::TNow) ? Expr(1) : Expr();
            return (v.mode == M::JetVar && v.jet == e.jet_tag()) ? Expr(1) : Expr();
        case Expr::Kind::Fn: return diff_fn(e.fn_atom(), v);
        case Expr::Kind::Sum: {
            std::vector<Expr> out;
            for (const auto& t : e.operands()) out.push_back(diff_raw(t, v));
            return Expr::sum(std::move(out));
        }
        case Expr::Kind::Product: {
            const auto& fs = e.operands();
            std::vector<Expr> out;
            for (size_t i = 0; i < fs.size(); ++i) {
                Expr di = diff_raw(fs[i], v);
                if (di.is_zero_literal()) continue;
                std::vector<Expr> term;
                for (size_t j = 0; j < fs.size(); ++j) term.push_back(i == j ? di : fs[j]);
                out.push_back(Expr::product(std::move(term)));
            }
            return Expr::sum(std::move(out));
        }
        case Expr::Kind::Power: {
            const Expr& b = e.operands()[0];
            Expr db = diff_raw(b, v);
            if (db.is_zero_literal()) return Expr();
            int n = e.exponent();
            return Expr::product({Expr(n), pow(b, n - 1), db});
        }
        case Expr::Kind::Apply: {
            const Expr& u = e.operands()[0];
            Expr du = diff_raw(u, v);
            if (du.is_zero_literal()) return Expr();
            switch (e.elementary()) {
                case Elementary::Sin: return cos(u) * du;
                case Elementary::Cos: return -(sin(u) * du);
                case Elementary::Exp: return e * du;
                case Elementary::Ln: return du * pow(u, -1);
                case Elementary::Sqrt: return Expr(Rational(1, 2)) * du * pow(e, -1);
            }
        }
    }
    return Expr();
}

Expr shift_raw(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Constant:
        case Expr::Kind::Param: return e;
        case Expr::Kind::JetVar:
            switch (e.jet_tag()) {
                case Jet::T: return Expr::t() - Expr::delay();
                case Jet::X: return Expr::jet(Jet::XR);
                case Jet::X1: return Expr::jet(Jet::X1R);
                case Jet::X2: return Expr::jet(Jet::X2R);
                default: throw DoubleShiftError("shift of an already delayed jet variable " + jet_name(e.jet_tag()));
            }
        case Expr::Kind::Fn: {
            FnAtom f = e.fn_atom();
            if (f.delayed) throw DoubleShiftError("shift of an already delayed function " + f.name);
            f.delayed = true;
            return Expr::fn(f);
        }
        case Expr::Kind::Sum:
        case Expr::Kind::Product: {
            std::vector<Expr> out;
            for (const auto& a : e.operands()) out.push_back(shift_raw(a));
            return e.kind() == Expr::Kind::Sum ? Expr::sum(std::move(out)) : Expr::product(std::move(out));
        }
        case Expr::Kind::Power: return Expr::power(shift_raw(e.operands()[0]), e.exponent());
        case Expr::Kind::Apply: return Expr::apply(e.elementary(), shift_raw(e.operands()[0]));
    }
    return e;
}

Expr function_binding(const FnAtom& f, const Expr& binding) {
    Expr g = binding;
    for (int i = 0; i < f.dt; ++i) g = diff_raw(g, DiffVar{DiffVar::Mode::TAll, Jet::T});
    for (int i = 0; i < f.dx; ++i) g = diff_raw(g, DiffVar::of(Jet::X));
    g = normalize(g);
    if (f.delayed) g = shift_raw(g);
    return g;
}

Expr subst_raw(const Expr& e, const Substitution& s) {
    switch (e.kind()) {
        case Expr::Kind::Constant: return e;
        case Expr::Kind::Param: {
            auto it = s.params.find(e.name());
            return it == s.params.end() ? e : it->second;
        }
        case Expr::Kind::JetVar: {
            auto it = s.jets.find(e.jet_tag());
            return it == s.jets.end() ? e : it->second;
        }
        case Expr::Kind::Fn: {
            const FnAtom& f = e.fn_atom();
            for (const auto& [atom, rep] : s.atoms)
                if (atom == f) return rep;
            auto it = s.functions.find(f.name);
            if (it != s.functions.end()) return function_binding(f, it->second);
            return e;
        }
        case Expr::Kind::Sum:
        case Expr::Kind::Product: {
            std::vector<Expr> out;
            for (const auto& a : e.operands()) out.push_back(subst_raw(a, s));
            return e.kind() == Expr::Kind::Sum ? Expr::sum(std::move(out)) : Expr::product(std::move(out));
        }
        case Expr::Kind::Power: return Expr::power(subst_raw(e.operands()[0], s), e.exponent());
        case Expr::Kind::Apply: return Expr::apply(e.elementary(), subst_raw(e.operands()[0], s));
    }
    return e;
}

bool mentions_any(const Expr& e, const std::vector<Jet>& vars) {
    for (Jet j : vars)
        if (j != Jet::T && depends_on(e, j)) return true;
    if (std::find(vars.begin(), vars.end(), Jet::T) != vars.end() && depends_on(e, Jet::T)) return true;
    return false;
}

}  // namespace

Expr diff(const Expr& e, DiffVar v) { return normalize(diff_raw(e, v)); }

Expr shift(const Expr& e) { return normalize(shift_raw(e)); }

Expr substitute(const Expr& e, const Substitution& s) { return normalize(subst_raw(e, s)); }

std::string monomial_label(const JetMonomial& m) {
    std::string out;
    for (int i = 0; i < kJetCount; ++i) {
        if (m[i] == 0) continue;
        if (!out.empty()) out += "*";
        out += jet_name(Jet(i));
        if (m[i] != 1) out += "^" + std::to_string(m[i]);
    }
    return out.empty() ? "1" : out;
}

Expr monomial_expr(const JetMonomial& m) {
    std::vector<Expr> f;
    for (int i = 0; i < kJetCount; ++i)
        if (m[i] != 0) f.push_back(pow(Expr::jet(Jet(i)), m[i]));
    return Expr::product(std::move(f));
}

std::map<JetMonomial, Expr> collect(const Expr& e, const std::vector<Jet>& vars) {
    Expr n = normalize(e);
    std::map<JetMonomial, std::vector<Expr>> parts;
    parts[JetMonomial{}];
    std::vector<Expr> terms = n.kind() == Expr::Kind::Sum ? n.operands() : std::vector<Expr>{n};
    for (const auto& term : terms) {
        if (term.is_zero_literal()) continue;
        std::vector<Expr> factors = term.kind() == Expr::Kind::Product ? term.operands() : std::vector<Expr>{term};
        JetMonomial key{};
        std::vector<Expr> coeff;
        for (const auto& f : factors) {
            const Expr& base = f.kind() == Expr::Kind::Power ? f.operands()[0] : f;
            int e_ = f.kind() == Expr::Kind::Power ? f.exponent() : 1;
            if (base.kind() == Expr::Kind::JetVar &&
                std::find(vars.begin(), vars.end(), base.jet_tag()) != vars.end()) {
                if (e_ < 0)
                    throw NonPolynomialError("negative power of " + jet_name(base.jet_tag()));
                key[int(base.jet_tag())] += e_;
                continue;
            }
            if (mentions_any(base, vars))
                throw NonPolynomialError("non-polynomial dependence in factor " + base.str());
            coeff.push_back(f);
        }
        parts[key].push_back(Expr::product(std::move(coeff)));
    }
    std::map<JetMonomial, Expr> out;
    for (auto& [k, v] : parts) {
        Expr c = normalize(Expr::sum(std::move(v)));
        if (k == JetMonomial{} || !c.is_zero_literal()) out[k] = c;
    }
    return out;
}

}  // namespace ndelie
