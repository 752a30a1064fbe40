#include <map>

#include "ndelie/expr.hpp"

namespace ndelie {

namespace {

using Factor = std::pair<Expr, int>;
using Monomial = std::vector<Factor>;  // sorted by base, exponents nonzero

struct MonoLess {
    bool operator()(const Monomial& a, const Monomial& b) const {
        for (size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
            if (int c = compare(a[i].first, b[i].first)) return c < 0;
            if (a[i].second != b[i].second) return a[i].second < b[i].second;
        }
        return a.size() < b.size();
    }
};

using Poly = std::map<Monomial, Rational, MonoLess>;

Poly to_poly(const Expr& e);
Expr from_poly(const Poly& p);

Poly constant_poly(const Rational& q) {
    Poly p;
    if (sgn(q) != 0) p[{}] = q;
    return p;
}

Poly atom_poly(const Expr& atom) { return Poly{{Monomial{{atom, 1}}, Rational(1)}}; }

Rational rpow(const Rational& q, int n) {
    if (n < 0) {
        if (sgn(q) == 0) throw SymbolicError("division by zero");
        return rpow(Rational(1 / q), -n);
    }
    Rational r(1);
    for (int i = 0; i < n; ++i) r *= q;
    return r;
}

Monomial mono_mul(const Monomial& a, const Monomial& b) {
    Monomial out;
    size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && compare(a[i].first, b[j].first) < 0)) {
            out.push_back(a[i++]);
        } else if (i == a.size() || compare(b[j].first, a[i].first) < 0) {
            out.push_back(b[j++]);
        } else {
            int e = a[i].second + b[j].second;
            if (e != 0) out.emplace_back(a[i].first, e);
            ++i;
            ++j;
        }
    }
    return out;
}

void add_term(Poly& p, const Monomial& m, const Rational& q) {
    if (sgn(q) == 0) return;
    auto [it, inserted] = p.emplace(m, q);
    if (!inserted) {
        it->second += q;
        if (sgn(it->second) == 0) p.erase(it);
    }
}

Poly poly_add(Poly a, const Poly& b) {
    for (const auto& [m, q] : b) add_term(a, m, q);
    return a;
}

Poly poly_mul_raw(const Poly& a, const Poly& b) {
    Poly out;
    for (const auto& [ma, qa] : a)
        for (const auto& [mb, qb] : b) add_term(out, mono_mul(ma, mb), qa * qb);
    return out;
}

Poly poly_pow_raw(const Poly& p, int n) {
    Poly result = constant_poly(1);
    Poly base = p;
    while (n > 0) {
        if (n & 1) result = poly_mul_raw(result, base);
        n >>= 1;
        if (n) base = poly_mul_raw(base, base);
    }
    return result;
}

// Positive powers of sum bases are expanded; even powers of square roots are
// folded into their radicand. Repeats until no such factor remains.
Poly settle(Poly p) {
    for (int guard = 0; guard < 64; ++guard) {
        bool changed = false;
        Poly out;
        for (const auto& [m, q] : p) {
            Monomial rest;
            Poly extra = constant_poly(1);
            bool touched = false;
            for (const auto& [base, e] : m) {
                if (base.kind() == Expr::Kind::Sum && e > 0) {
                    extra = poly_mul_raw(extra, poly_pow_raw(to_poly(base), e));
                    touched = true;
                } else if (base.kind() == Expr::Kind::Apply && base.elementary() == Elementary::Sqrt &&
                           (e >= 2 || e <= -2)) {
                    int half = e / 2;  // truncation toward zero keeps the residual exponent in {-1,0,1}
                    int keep = e - 2 * half;
                    const Expr& u = base.operands()[0];
                    extra = poly_mul_raw(extra, to_poly(Expr::power(u, half)));
                    if (keep != 0) rest = mono_mul(rest, Monomial{{base, keep}});
                    touched = true;
                } else {
                    rest = mono_mul(rest, Monomial{{base, e}});
                }
            }
            if (touched) {
                changed = true;
                Poly term{{rest, q}};
                if (rest.empty()) term = constant_poly(q);
                out = poly_add(out, poly_mul_raw(term, extra));
            } else {
                add_term(out, m, q);
            }
        }
        p = std::move(out);
        if (!changed) return p;
    }
    return p;
}

Poly poly_mul(const Poly& a, const Poly& b) { return settle(poly_mul_raw(a, b)); }

Poly poly_power(const Poly& p, int n) {
    if (n == 0) return constant_poly(1);
    if (p.empty()) {
        if (n < 0) throw SymbolicError("division by zero");
        return {};
    }
    if (p.size() == 1) {
        const auto& [m, q] = *p.begin();
        Monomial mm;
        for (const auto& [b, e] : m) mm.emplace_back(b, e * n);
        Poly out;
        out[mm] = rpow(q, n);
        return settle(out);
    }
    if (n > 0) return settle(poly_pow_raw(p, n));
    // Opaque base: scale so the leading coefficient is 1.
    Rational lead = p.begin()->second;
    Poly monic;
    for (const auto& [m, q] : p) monic[m] = q / lead;
    Expr base = from_poly(monic);
    Poly out;
    out[Monomial{{base, n}}] = rpow(lead, n);
    return out;
}

// Reduce sin/cos arguments modulo multiples of pi/2 and apply parity.
std::optional<Poly> fold_trig(Elementary f, Poly arg) {
    bool negate = false;
    int quarter = 0;
    Monomial pi_mono{{Expr::pi(), 1}};
    auto it = arg.find(pi_mono);
    if (it != arg.end()) {
        Rational twice = it->second * 2;
        if (twice.get_den() == 1) {
            mpz_class n = twice.get_num();
            mpz_class m = n % 4;
            if (m < 0) m += 4;
            quarter = int(m.get_si());
            arg.erase(it);
        }
    }
    bool flip_arg = !arg.empty() && sgn(arg.begin()->second) < 0;
    if (flip_arg)
        for (auto& [m, q] : arg) q = -q;
    Expr u = from_poly(arg);
    bool zero_arg = arg.empty();
    // sin(s*u + n*pi/2) with s = -1 when flipped
    Elementary g = f;
    if (f == Elementary::Sin) {
        switch (quarter) {
            case 0: g = Elementary::Sin; break;
            case 1: g = Elementary::Cos; break;
            case 2: g = Elementary::Sin; negate = true; break;
            case 3: g = Elementary::Cos; negate = true; break;
        }
    } else {
        switch (quarter) {
            case 0: g = Elementary::Cos; break;
            case 1: g = Elementary::Sin; negate = true; break;
            case 2: g = Elementary::Cos; negate = true; break;
            case 3: g = Elementary::Sin; break;
        }
    }
    // Apply the parity of g to the sign of u. For sin(-u+...) the rewrite above
    // used sin(x+n pi/2) identities with x = -u, so only g's parity matters.
    if (flip_arg && g == Elementary::Sin) negate = !negate;
    Poly out;
    if (zero_arg) {
        out = constant_poly(g == Elementary::Sin ? 0 : 1);
    } else {
        out = atom_poly(Expr::apply(g, u));
    }
    if (negate)
        for (auto& [m, q] : out) q = -q;
    return out;
}

Poly apply_poly(Elementary f, const Expr& raw_arg) {
    Poly arg = to_poly(raw_arg);
    if (f == Elementary::Sin || f == Elementary::Cos) return *fold_trig(f, std::move(arg));
    if (arg.empty()) {
        switch (f) {
            case Elementary::Exp: return constant_poly(1);
            case Elementary::Sqrt: return {};
            case Elementary::Ln: throw SymbolicError("ln(0)");
            default: break;
        }
    }
    if (arg.size() == 1 && arg.begin()->first.empty()) {
        const Rational& q = arg.begin()->second;
        if (f == Elementary::Ln && q == 1) return {};
        if (f == Elementary::Sqrt && sgn(q) > 0) {
            mpz_class n = q.get_num(), d = q.get_den();
            mpz_class sn = ::sqrt(n), sd = ::sqrt(d);
            if (sn * sn == n && sd * sd == d) return constant_poly(Rational(sn, sd));
        }
    }
    return atom_poly(Expr::apply(f, from_poly(arg)));
}

Poly to_poly(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Constant: return constant_poly(e.value());
        case Expr::Kind::Param:
            if (e.binding()) return constant_poly(*e.binding());
            return atom_poly(e);
        case Expr::Kind::JetVar:
        case Expr::Kind::Fn: return atom_poly(e);
        case Expr::Kind::Apply: return apply_poly(e.elementary(), e.operands()[0]);
        case Expr::Kind::Power: return poly_power(to_poly(e.operands()[0]), e.exponent());
        case Expr::Kind::Product: {
            Poly p = constant_poly(1);
            for (const auto& f : e.operands()) {
                p = poly_mul(p, to_poly(f));
                if (p.empty()) break;
            }
            return p;
        }
        case Expr::Kind::Sum: {
            Poly p;
            for (const auto& t : e.operands()) p = poly_add(std::move(p), to_poly(t));
            return p;
        }
    }
    return {};
}

Expr term_expr(const Monomial& m, const Rational& q) {
    std::vector<Expr> factors;
    if (q != 1 || m.empty()) factors.emplace_back(q);
    for (const auto& [b, e] : m) factors.push_back(Expr::power(b, e));
    return Expr::product(std::move(factors));
}

Expr from_poly(const Poly& p) {
    if (p.empty()) return Expr();
    std::vector<Expr> terms;
    terms.reserve(p.size());
    for (const auto& [m, q] : p) terms.push_back(term_expr(m, q));
    return Expr::sum(std::move(terms));
}

}  // namespace

Expr normalize(const Expr& e) { return from_poly(to_poly(e)); }

}  // namespace ndelie
