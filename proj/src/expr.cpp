#include "ndelie/expr.hpp"

#include <algorithm>
#include <cctype>

namespace ndelie {

namespace {

std::shared_ptr<Node> make(Expr::Kind k) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    return n;
}

// Natural order so that c2 sorts before c10.
int compare_names(const std::string& a, const std::string& b) {
    auto split = [](const std::string& s) {
        size_t i = s.size();
        while (i > 0 && std::isdigit(static_cast<unsigned char>(s[i - 1]))) --i;
        return std::pair{s.substr(0, i), s.substr(i)};
    };
    auto [pa, na] = split(a);
    auto [pb, nb] = split(b);
    if (pa != pb) return pa < pb ? -1 : 1;
    if (na.size() != nb.size()) return na.size() < nb.size() ? -1 : 1;
    if (na != nb) return na < nb ? -1 : 1;
    return 0;
}

int cmp_int(long a, long b) { return a < b ? -1 : (a > b ? 1 : 0); }

}  // namespace

Expr::Expr() : Expr(Rational(0)) {}
Expr::Expr(long v) : Expr(Rational(v)) {}
Expr::Expr(const Rational& q) {
    auto n = make(Kind::Constant);
    n->value = q;
    n->value.canonicalize();
    node_ = std::move(n);
}

Expr Expr::constant(const Rational& q) { return Expr(q); }

Expr Expr::param(std::string name, std::optional<Rational> value) {
    auto n = make(Kind::Param);
    n->name = std::move(name);
    n->binding = std::move(value);
    return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::jet(Jet j) {
    auto n = make(Kind::JetVar);
    n->jet = j;
    return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::fn(FnAtom f) {
    if (f.order() > kMaxDerivOrder)
        throw DerivativeOrderError("derivative order of " + f.name + " exceeds " +
                                   std::to_string(kMaxDerivOrder));
    auto n = make(Kind::Fn);
    n->fn = std::move(f);
    return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::fn(std::string name, int dt, bool delayed) {
    return fn(FnAtom{std::move(name), delayed, dt, 0, false});
}

Expr Expr::field(std::string name, int dt, int dx, bool delayed) {
    return fn(FnAtom{std::move(name), delayed, dt, dx, true});
}

Expr Expr::sum(std::vector<Expr> terms) {
    if (terms.empty()) return Expr();
    if (terms.size() == 1) return terms.front();
    auto n = make(Kind::Sum);
    n->args = std::move(terms);
    return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::product(std::vector<Expr> factors) {
    if (factors.empty()) return Expr(1);
    if (factors.size() == 1) return factors.front();
    auto n = make(Kind::Product);
    n->args = std::move(factors);
    return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::power(Expr base, int exponent) {
    if (exponent == 1) return base;
    auto n = make(Kind::Power);
    n->exponent = exponent;
    n->args = {std::move(base)};
    return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::apply(Elementary f, Expr arg) {
    auto n = make(Kind::Apply);
    n->elem = f;
    n->args = {std::move(arg)};
    return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr::Kind Expr::kind() const { return node_->kind; }
bool Expr::is_zero_literal() const { return kind() == Kind::Constant && sgn(node_->value) == 0; }
bool Expr::is_one_literal() const { return kind() == Kind::Constant && node_->value == 1; }
const Rational& Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
const std::optional<Rational>& Expr::binding() const { return node_->binding; }
Jet Expr::jet_tag() const { return node_->jet; }
const FnAtom& Expr::fn_atom() const { return node_->fn; }
Elementary Expr::elementary() const { return node_->elem; }
const std::vector<Expr>& Expr::operands() const { return node_->args; }
int Expr::exponent() const { return node_->exponent; }

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_zero_literal()) return b;
    if (b.is_zero_literal()) return a;
    return Expr::sum({a, b});
}
Expr operator-(const Expr& a) {
    if (a.is_constant()) return Expr(Rational(-a.value()));
    return Expr::product({Expr(-1), a});
}
Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }
Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_zero_literal() || b.is_zero_literal()) return Expr();
    if (a.is_one_literal()) return b;
    if (b.is_one_literal()) return a;
    return Expr::product({a, b});
}
Expr operator/(const Expr& a, const Expr& b) {
    if (b.is_constant()) {
        if (sgn(b.value()) == 0) throw SymbolicError("division by zero");
        return a * Expr(Rational(1 / b.value()));
    }
    return a * Expr::power(b, -1);
}

Expr pow(const Expr& base, int n) {
    if (n == 0) return Expr(1);
    return Expr::power(base, n);
}
Expr sin(const Expr& e) { return Expr::apply(Elementary::Sin, e); }
Expr cos(const Expr& e) { return Expr::apply(Elementary::Cos, e); }
Expr exp(const Expr& e) { return Expr::apply(Elementary::Exp, e); }
Expr ln(const Expr& e) { return Expr::apply(Elementary::Ln, e); }
Expr sqrt(const Expr& e) { return Expr::apply(Elementary::Sqrt, e); }

int compare(const Expr& a, const Expr& b) {
    if (&a.node() == &b.node()) return 0;
    if (a.kind() != b.kind()) return cmp_int(int(a.kind()), int(b.kind()));
    switch (a.kind()) {
        case Expr::Kind::Constant: return cmp(a.value(), b.value()) < 0 ? -1 : (cmp(a.value(), b.value()) > 0 ? 1 : 0);
        case Expr::Kind::Param: return compare_names(a.name(), b.name());
        case Expr::Kind::Fn: {
            const auto& fa = a.fn_atom();
            const auto& fb = b.fn_atom();
            if (int c = compare_names(fa.name, fb.name)) return c;
            if (fa.field != fb.field) return cmp_int(fa.field, fb.field);
            if (fa.delayed != fb.delayed) return cmp_int(fa.delayed, fb.delayed);
            if (fa.dt != fb.dt) return cmp_int(fa.dt, fb.dt);
            return cmp_int(fa.dx, fb.dx);
        }
        case Expr::Kind::JetVar: return cmp_int(int(a.jet_tag()), int(b.jet_tag()));
        case Expr::Kind::Apply:
            if (a.elementary() != b.elementary()) return cmp_int(int(a.elementary()), int(b.elementary()));
            return compare(a.operands()[0], b.operands()[0]);
        case Expr::Kind::Power:
            if (int c = compare(a.operands()[0], b.operands()[0])) return c;
            return cmp_int(a.exponent(), b.exponent());
        case Expr::Kind::Product:
        case Expr::Kind::Sum: {
            const auto& x = a.operands();
            const auto& y = b.operands();
            for (size_t i = 0; i < std::min(x.size(), y.size()); ++i)
                if (int c = compare(x[i], y[i])) return c;
            return cmp_int(long(x.size()), long(y.size()));
        }
    }
    return 0;
}

bool structurally_equal(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

bool equivalent(const Expr& a, const Expr& b) { return normalize(a - b).is_zero_literal(); }

std::string jet_name(Jet j) {
    switch (j) {
        case Jet::T: return "t";
        case Jet::X: return "x";
        case Jet::XR: return "xr";
        case Jet::X1: return "x1";
        case Jet::X1R: return "x1r";
        case Jet::X2: return "x2";
        case Jet::X2R: return "x2r";
    }
    return "?";
}

std::string elementary_name(Elementary f) {
    switch (f) {
        case Elementary::Sin: return "sin";
        case Elementary::Cos: return "cos";
        case Elementary::Exp: return "exp";
        case Elementary::Ln: return "ln";
        case Elementary::Sqrt: return "sqrt";
    }
    return "?";
}

bool depends_on(const Expr& e, Jet j) {
    switch (e.kind()) {
        case Expr::Kind::JetVar: return e.jet_tag() == j;
        case Expr::Kind::Fn: {
            const auto& f = e.fn_atom();
            if (j == Jet::T) return true;
            if (!f.field) return false;
            return (j == Jet::X && !f.delayed) || (j == Jet::XR && f.delayed);
        }
        case Expr::Kind::Constant:
        case Expr::Kind::Param: return false;
        default:
            for (const auto& a : e.operands())
                if (depends_on(a, j)) return true;
            return false;
    }
}

bool has_delayed_atoms(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::JetVar: {
            Jet j = e.jet_tag();
            return j == Jet::XR || j == Jet::X1R || j == Jet::X2R;
        }
        case Expr::Kind::Fn: return e.fn_atom().delayed;
        case Expr::Kind::Constant:
        case Expr::Kind::Param: return false;
        default:
            for (const auto& a : e.operands())
                if (has_delayed_atoms(a)) return true;
            return false;
    }
}

bool contains_fn(const Expr& e, const std::string& name) {
    if (e.kind() == Expr::Kind::Fn) return e.fn_atom().name == name;
    for (const auto& a : e.operands())
        if (contains_fn(a, name)) return true;
    return false;
}

void fn_atoms(const Expr& e, std::vector<FnAtom>& out) {
    if (e.kind() == Expr::Kind::Fn) {
        if (std::find(out.begin(), out.end(), e.fn_atom()) == out.end()) out.push_back(e.fn_atom());
        return;
    }
    for (const auto& a : e.operands()) fn_atoms(a, out);
}

void param_names(const Expr& e, std::vector<std::string>& out) {
    if (e.kind() == Expr::Kind::Param) {
        if (std::find(out.begin(), out.end(), e.name()) == out.end()) out.push_back(e.name());
        return;
    }
    for (const auto& a : e.operands()) param_names(a, out);
}

}  // namespace ndelie
