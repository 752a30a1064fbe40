#include "ndelie/prolong.hpp"

#include <stdexcept>

namespace ndelie {

namespace {

const Expr& x1() {
    static const Expr e = Expr::jet(Jet::X1);
    return e;
}
const Expr& x2() {
    static const Expr e = Expr::jet(Jet::X2);
    return e;
}

}  // namespace

void validate(const InfinitesimalAnsatz& a) {
    for (const Expr* e : {&a.omega, &a.upsilon}) {
        for (Jet j : {Jet::XR, Jet::X1, Jet::X1R, Jet::X2, Jet::X2R})
            if (depends_on(*e, j)) throw std::invalid_argument("infinitesimal depends on " + jet_name(j));
        if (has_delayed_atoms(*e)) throw std::invalid_argument("infinitesimal contains delayed atoms");
    }
}

Expr total_derivative(const Expr& e) {
    if (depends_on(e, Jet::X2)) throw std::invalid_argument("total derivative of an expression in x2");
    return normalize(diff(e, Jet::T) + x1() * diff(e, Jet::X) + x2() * diff(e, Jet::X1));
}

Expr prolong_first(const InfinitesimalAnsatz& a) {
    validate(a);
    const Expr& w = a.omega;
    const Expr& u = a.upsilon;
    Expr u_t = diff(u, Jet::T), u_x = diff(u, Jet::X);
    Expr w_t = diff(w, Jet::T), w_x = diff(w, Jet::X);
    return normalize(u_t + (u_x - w_t) * x1() - w_x * pow(x1(), 2));
}

Expr prolong_second(const InfinitesimalAnsatz& a) {
    validate(a);
    const Expr& w = a.omega;
    const Expr& u = a.upsilon;
    Expr u_t = diff(u, Jet::T), u_x = diff(u, Jet::X);
    Expr w_t = diff(w, Jet::T), w_x = diff(w, Jet::X);
    Expr u_tt = diff(u_t, Jet::T), u_tx = diff(u_t, Jet::X), u_xx = diff(u_x, Jet::X);
    Expr w_tt = diff(w_t, Jet::T), w_tx = diff(w_t, Jet::X), w_xx = diff(w_x, Jet::X);
    return normalize(u_tt + (Expr(2) * u_tx - w_tt) * x1() + (u_xx - Expr(2) * w_tx) * pow(x1(), 2) -
                     w_xx * pow(x1(), 3) + (u_x - Expr(2) * w_t) * x2() - Expr(3) * w_x * x1() * x2());
}

DelayedProlongation prolong_delayed(const InfinitesimalAnsatz& a) {
    return {shift(a.omega), shift(a.upsilon), shift(prolong_first(a)), shift(prolong_second(a))};
}

Prolongation prolong(const InfinitesimalAnsatz& a) {
    Expr ut = prolong_first(a);
    Expr utt = prolong_second(a);
    return {ut, utt, shift(a.omega), shift(a.upsilon), shift(ut), shift(utt)};
}

Expr solved_rhs(const EquationResidual& eq) {
    auto parts = collect(eq.delta, {Jet::X2});
    JetMonomial lin{};
    lin[int(Jet::X2)] = 1;
    if (parts.size() > 2 || !parts.count(lin))
        throw std::invalid_argument("equation is not linear in x2");
    const Expr& q = parts.at(lin);
    if (!q.is_constant() || sgn(q.value()) == 0)
        throw std::invalid_argument("coefficient of x2 must be a nonzero constant");
    return normalize(-(parts.at(JetMonomial{}) / q));
}

Expr apply_operator_raw(const InfinitesimalAnsatz& a, const EquationResidual& eq) {
    Prolongation p = prolong(a);
    const Expr& d = eq.delta;
    Expr z = a.omega * diff(d, DiffVar::t_now()) + p.omega_r * diff(d, DiffVar::t_delayed()) +
             a.upsilon * diff(d, Jet::X) + p.upsilon_r * diff(d, Jet::XR) + p.ups_t * diff(d, Jet::X1) +
             p.ups_t_r * diff(d, Jet::X1R) + p.ups_tt * diff(d, Jet::X2) + p.ups_tt_r * diff(d, Jet::X2R);
    return normalize(z);
}

Expr apply_operator(const InfinitesimalAnsatz& a, const EquationResidual& eq) {
    Expr F = solved_rhs(eq);
    Substitution s;
    s.jets[Jet::X2] = F;
    return substitute(apply_operator_raw(a, eq), s);
}

}  // namespace ndelie
