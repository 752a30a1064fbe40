#include <doctest.h>

#include <random>

#include "ndelie/parse.hpp"
#include "ndelie/prolong.hpp"

using namespace ndelie;

namespace {

Expr P(const char* s) { return parse(s); }
bool same(const Expr& a, const Expr& b) { return equivalent(a, b); }

InfinitesimalAnsatz A(const char* w, const char* u) { return {P(w), P(u), {}}; }

EquationResidual linear_eq() { return {P("x2 + b(t)*x1r + c(t)*x + d(t)*xr + k(t)*x2r")}; }

Expr random_poly(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> q(-3, 3);
    std::uniform_int_distribution<int> coin(0, 3);
    const char* fns[] = {"beta", "gamma", "rho"};
    Expr acc;
    for (int i = 0; i <= 3; ++i)
        for (int j = 0; i + j <= 3; ++j) {
            int c = q(rng);
            if (c == 0) continue;
            Expr term = Expr(c) * pow(Expr::t(), i) * pow(Expr::x(), j);
            if (coin(rng) == 0) term = term * Expr::fn(fns[coin(rng) % 3]);
            acc = acc + term;
        }
    return acc;
}

}  // namespace

TEST_CASE("total derivative") {
    CHECK(same(total_derivative(P("x")), P("x1")));
    CHECK(same(total_derivative(P("gamma(t)*x + rho(t)")), P("gamma'(t)*x + rho'(t) + gamma(t)*x1")));
    CHECK(same(total_derivative(P("t*x1")), P("x1 + t*x2")));
    CHECK_THROWS(total_derivative(P("x2")));
}

TEST_CASE("first prolongation") {
    CHECK(prolong_first(A("t", "x")).is_zero_literal());
    CHECK(same(prolong_first(A("0", "sin(t)")), P("cos(t)")));
    CHECK(same(prolong_first(A("beta(t)", "gamma(t)*x + rho(t)")),
               P("gamma'(t)*x + rho'(t) + (gamma(t) - beta'(t))*x1")));
}

TEST_CASE("second prolongation") {
    CHECK(same(prolong_second(A("0", "sin(t)")), P("-sin(t)")));
    CHECK(same(prolong_second(A("t", "x")), P("-x2")));
    CHECK(same(prolong_second(A("beta(t)", "gamma(t)*x + rho(t)")),
               P("gamma''(t)*x + rho''(t) + (2*gamma'(t) - beta''(t))*x1 + (gamma(t) - 2*beta'(t))*x2")));
}

TEST_CASE("delayed prolongation") {
    auto d = prolong_delayed(A("0", "sin(t)"));
    CHECK(same(d.ups_tt_r, P("-sin(t-r)")));
    Substitution s;
    s.params["r"] = Expr::pi();
    CHECK(same(substitute(d.ups_tt_r, s), P("sin(t)")));
    auto b = prolong_delayed(A("beta(t)", "gamma(t)*x + rho(t)"));
    CHECK(same(b.ups_t_r, P("gamma'(t-r)*xr + rho'(t-r) + (gamma(t-r) - beta'(t-r))*x1r")));
    CHECK(same(prolong_delayed(A("t", "x")).omega_r, P("t - r")));
}

TEST_CASE("ansatz validation") {
    CHECK_THROWS(prolong_first(A("x1", "x")));
    CHECK_THROWS(prolong_first(A("0", "b(t-r)")));
}

TEST_CASE("extended operator") {
    EquationResidual ex1{P("x2 + x2r")};
    Expr z = apply_operator(A("0", "sin(t)"), ex1);
    CHECK(same(z, P("-sin(t) - sin(t-r)")));
    Substitution s;
    s.params["r"] = Expr::pi();
    CHECK(substitute(z, s).is_zero_literal());

    CHECK(apply_operator(A("0", "x"), linear_eq()).is_zero_literal());

    EquationResidual trivial{P("x2")};
    CHECK(same(apply_operator_raw(A("t", "0"), trivial), P("-2*x2")));
    CHECK(apply_operator(A("t", "0"), trivial).is_zero_literal());

    CHECK_THROWS(apply_operator(A("0", "x"), EquationResidual{P("x2^2 + x")}));
    CHECK_THROWS(apply_operator(A("0", "x"), EquationResidual{P("b(t)*x2 + x")}));
}

TEST_CASE("solved form scaling") {
    CHECK(same(solved_rhs({P("2*x2 + 4*x")}), P("-2*x")));
}

TEST_CASE("property: expansion identity") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 60; ++i) {
        InfinitesimalAnsatz a{random_poly(rng), random_poly(rng), {}};
        Expr lhs = prolong_second(a);
        Expr rhs = total_derivative(prolong_first(a)) - Expr::jet(Jet::X2) * total_derivative(a.omega);
        CHECK(same(lhs, rhs));
        Expr first = total_derivative(a.upsilon) - Expr::jet(Jet::X1) * total_derivative(a.omega);
        CHECK(same(prolong_first(a), first));
    }
}

TEST_CASE("property: delay naturality") {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 40; ++i) {
        InfinitesimalAnsatz a{random_poly(rng), random_poly(rng), {}};
        auto d = prolong_delayed(a);
        CHECK(same(d.omega_r, shift(a.omega)));
        CHECK(same(d.upsilon_r, shift(a.upsilon)));
        CHECK(same(d.ups_t_r, shift(prolong_first(a))));
        CHECK(same(d.ups_tt_r, shift(prolong_second(a))));
    }
}

TEST_CASE("property: operator equals the invariance condition") {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> q(-2, 2);
    for (int i = 0; i < 40; ++i) {
        InfinitesimalAnsatz a{random_poly(rng), random_poly(rng), {}};
        // random linear right-hand side with undelayed coefficients
        Expr F = Expr(q(rng)) * P("a(t)*x1") + Expr(q(rng)) * P("b(t)*x1r") + Expr(q(rng)) * P("c(t)*x") +
                 Expr(q(rng)) * P("d(t)*xr") + Expr(q(rng)) * P("k(t)*x2r") + Expr(q(rng)) * P("h(t)");
        F = normalize(F);
        Prolongation p = prolong(a);
        Substitution s;
        s.jets[Jet::X2] = F;
        Expr lhs = substitute(p.ups_tt, s);
        Expr rhs = a.omega * diff(F, DiffVar::t_now()) + p.omega_r * diff(F, DiffVar::t_delayed()) +
                   a.upsilon * diff(F, Jet::X) + p.upsilon_r * diff(F, Jet::XR) +
                   substitute(p.ups_t, s) * diff(F, Jet::X1) + p.ups_t_r * diff(F, Jet::X1R) +
                   p.ups_tt_r * diff(F, Jet::X2R);
        Expr z = apply_operator(a, {Expr::jet(Jet::X2) - F});
        CHECK(same(z, lhs - rhs));
    }
}

TEST_CASE("property: operator is linear in the ansatz") {
    std::mt19937_64 rng(24);
    for (int i = 0; i < 30; ++i) {
        InfinitesimalAnsatz a1{random_poly(rng), random_poly(rng), {}};
        InfinitesimalAnsatz a2{random_poly(rng), random_poly(rng), {}};
        InfinitesimalAnsatz s{a1.omega + a2.omega, a1.upsilon + a2.upsilon, {}};
        CHECK(same(apply_operator(s, linear_eq()),
                   apply_operator(a1, linear_eq()) + apply_operator(a2, linear_eq())));
    }
}
