#include <sstream>

#include "ndelie/expr.hpp"

namespace ndelie {

namespace {

std::string render(const Expr& e);

bool negative_lead(const Expr& e) {
    if (e.kind() == Expr::Kind::Constant) return sgn(e.value()) < 0;
    if (e.kind() == Expr::Kind::Product) {
        const Expr& f = e.operands().front();
        return f.kind() == Expr::Kind::Constant && sgn(f.value()) < 0;
    }
    return false;
}

std::string render_rational(const Rational& q) {
    std::string s = q.get_num().get_str();
    if (q.get_den() != 1) s += "/" + q.get_den().get_str();
    return s;
}

std::string wrapped(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Sum:
        case Expr::Kind::Product:
        case Expr::Kind::Power: return "(" + render(e) + ")";
        case Expr::Kind::Constant:
            if (sgn(e.value()) < 0 || e.value().get_den() != 1) return "(" + render(e) + ")";
            return render(e);
        default: return render(e);
    }
}

std::string render_fn(const FnAtom& f) {
    std::string s = f.name;
    if (f.field) {
        if (f.dt + f.dx > 0) s += "_" + std::string(f.dt, 't') + std::string(f.dx, 'x');
        return s + (f.delayed ? "(t-r,xr)" : "(t,x)");
    }
    s += std::string(f.dt, '\'');
    return s + (f.delayed ? "(t-r)" : "(t)");
}

std::string render_product(const std::vector<Expr>& fs) {
    std::string out;
    size_t start = 0;
    if (fs.front().kind() == Expr::Kind::Constant) {
        const Rational& q = fs.front().value();
        start = 1;
        if (q == -1) {
            out = "-";
        } else if (q != 1) {
            out = render_rational(q) + "*";
        }
    }
    for (size_t i = start; i < fs.size(); ++i) {
        if (i > start) out += "*";
        const Expr& f = fs[i];
        out += f.kind() == Expr::Kind::Sum ? "(" + render(f) + ")" : render(f);
    }
    return out;
}

std::string render(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Constant: return render_rational(e.value());
        case Expr::Kind::Param: return e.name();
        case Expr::Kind::JetVar: return jet_name(e.jet_tag());
        case Expr::Kind::Fn: return render_fn(e.fn_atom());
        case Expr::Kind::Apply: return elementary_name(e.elementary()) + "(" + render(e.operands()[0]) + ")";
        case Expr::Kind::Power: return wrapped(e.operands()[0]) + "^" + std::to_string(e.exponent());
        case Expr::Kind::Product: return render_product(e.operands());
        case Expr::Kind::Sum: {
            std::string out;
            bool first = true;
            for (const auto& t : e.operands()) {
                if (first) {
                    out = render(t);
                    first = false;
                } else if (negative_lead(t)) {
                    out += " - " + render(normalize(-t));
                } else {
                    out += " + " + render(t);
                }
            }
            return out;
        }
    }
    return "?";
}

}  // namespace

std::string Expr::str() const { return render(*this); }

}  // namespace ndelie
