#include "ndelie/detsys.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ndelie/parse.hpp"
#include "ndelie/sampling.hpp"

namespace ndelie {

using nlohmann::json;

// ---------------------------------------------------------------- assumptions

Assumption Assumption::nonzero(const std::string& f, std::string note) {
    return {Kind::NonZero, f, Expr(), std::move(note)};
}
Assumption Assumption::constant(const std::string& f, std::string note) {
    return {Kind::Constant, f, Expr(), std::move(note)};
}
Assumption Assumption::form_of(const std::string& f, const Expr& e, std::string note) {
    return {Kind::Form, f, e, std::move(note)};
}
Assumption Assumption::solves(const std::string& f, const Expr& delta, std::string note) {
    return {Kind::Solves, f, delta, std::move(note)};
}
Assumption Assumption::periodic(const std::string& f, std::string note) {
    return {Kind::Periodic, f, Expr(), std::move(note)};
}

std::string Assumption::describe() const {
    std::string s;
    switch (kind) {
        case Kind::NonZero: s = fn + "(t) != 0"; break;
        case Kind::Constant: s = fn + "(t) = constant"; break;
        case Kind::Form: s = fn + "(t) = " + form.str(); break;
        case Kind::Solves: s = fn + " solves " + form.str() + " = 0"; break;
        case Kind::Periodic: s = fn + "(t) = " + fn + "(t-r)"; break;
    }
    if (!note.empty()) s += " [" + note + "]";
    return s;
}

const DetEquation* DeterminingSystem::find(const std::string& label) const {
    for (const auto& e : equations)
        if (e.label == label) return &e;
    return nullptr;
}

const DetEquation* DeterminingSystem::find_tag(const std::string& tag) const {
    for (const auto& e : equations)
        if (e.tag == tag) return &e;
    return nullptr;
}

// ---------------------------------------------------------------- helpers

namespace {

std::vector<Expr> terms_of(const Expr& n) {
    if (n.is_zero_literal()) return {};
    if (n.kind() == Expr::Kind::Sum) return n.operands();
    return {n};
}

std::pair<Rational, Expr> split_term(const Expr& term) {
    if (term.is_constant()) return {term.value(), Expr(1)};
    if (term.kind() == Expr::Kind::Product && term.operands().front().is_constant()) {
        std::vector<Expr> rest(term.operands().begin() + 1, term.operands().end());
        return {term.operands().front().value(), Expr::product(std::move(rest))};
    }
    return {Rational(1), term};
}

Rational leading_coefficient(const Expr& n) {
    auto ts = terms_of(n);
    if (ts.empty()) return 0;
    return split_term(ts.front()).first;
}

bool proportional(const Expr& a, const Expr& b) {
    Expr na = normalize(a), nb = normalize(b);
    if (na.is_zero_literal() || nb.is_zero_literal()) return false;
    Rational la = leading_coefficient(na), lb = leading_coefficient(nb);
    return normalize(na * Expr(lb) - nb * Expr(la)).is_zero_literal();
}

Expr P(const char* s) { return parse(s); }

Expr omega_field(int dt = 0, int dx = 0, bool delayed = false) { return Expr::field("omega", dt, dx, delayed); }

/// f^(n)(t-r) -> f^(n)(t) for every n.
void add_periodic_rewrite(Substitution& s, const std::string& f) {
    for (int n = 0; n <= kMaxDerivOrder; ++n) s.atoms.push_back({FnAtom{f, true, n, 0, false}, Expr::fn(f, n)});
}

std::string tag_text(const std::string& tag) { return tag.empty() ? std::string() : "(" + tag + ")"; }

}  // namespace

// ---------------------------------------------------------------- reference rows

const std::vector<ReferenceRow>& reference_table() {
    static const std::vector<ReferenceRow> rows = {
        {"4.13", P("gamma''(t) + 2*beta'(t)*c(t) + beta(t)*c'(t)"), "x"},
        {"4.14", P("2*gamma'(t) - beta''(t)"), "x1"},
        {"4.14", P("gamma(t) - 1/2*beta'(t) - 1/2*c1"), "x1 integrated"},
        {"4.16", P("rho''(t) + b(t)*rho'(t-r) + c(t)*rho(t) + d(t)*rho(t-r) + k(t)*rho''(t-r)"), "1"},
        {"4.17", P("beta(t)*k'(t)"), "x2r"},
        {"4.20", P("k(t)*beta'''(t) + 2*beta(t)*d'(t) + 4*beta'(t)*d(t) + 2*b(t)*gamma'(t)"), "xr reduced"},
        {"4.21", P("b(t)*beta'(t) + beta(t)*b'(t)"), "x1r reduced"},
        {"4.22", P("b(t)*beta(t) - c3"), "x1r integrated"},
        {"4.24", P("omega'''(t) + 4*c(t)*omega'(t) + 2*c'(t)*omega(t)"), "x"},
        {"4.26", P("c2*omega'''(t) + 2*d'(t)*omega(t) + 4*d(t)*omega'(t) + b(t)*omega''(t)"), "xr (k = c2)"},
        {"4.27", P("omega(t) - c3*b(t)^-1"), "x1r integrated"},
        {"4.17", P("omega(t)*k'(t)"), "x2r"},
        {"4.16", P("rho''(t) + b(t)*rho'(t-r) + c(t)*rho(t) + d(t)*rho(t-r) + k(t)*rho''(t-r)"), "1"},
        {"4.21", P("b(t)*omega'(t) + omega(t)*b'(t)"), "x1r"},
        {"4.20", P("k(t)*omega'''(t) + 2*omega(t)*d'(t) + 4*omega'(t)*d(t) + b(t)*omega''(t)"), "xr"},
    };
    return rows;
}

std::string match_reference(const Expr& residual, const Substitution& coefficients, const std::string& label) {
    Expr n = normalize(residual);
    if (n.is_zero_literal()) return {};
    std::vector<const ReferenceRow*> order;
    for (const auto& row : reference_table())
        if (row.home == label) order.push_back(&row);
    for (const auto& row : reference_table())
        if (row.home != label) order.push_back(&row);
    for (const ReferenceRow* rp : order) {
        const ReferenceRow& row = *rp;
        Expr t;
        try {
            t = substitute(row.form, coefficients);
        } catch (const std::exception&) {
            continue;  // template divides by a coefficient that is zero here
        }
        if (t.is_zero_literal()) continue;
        if (proportional(n, t)) return row.tag;
    }
    return {};
}

// ---------------------------------------------------------------- residual and split

Expr invariance_residual(const NdeSpec& spec, const InfinitesimalAnsatz& a) {
    if (!spec.reduced())
        throw std::invalid_argument("invariance_residual needs a reduced spec (a = 0, h = 0)");
    Expr z = apply_operator(a, spec.equation());
    return bind_delay(z, spec);
}

DeterminingSystem split(const Expr& residual) {
    DeterminingSystem sys;
    sys.split_vars = {Jet::X, Jet::XR, Jet::X1, Jet::X1R, Jet::X2R};
    for (const auto& [m, c] : collect(residual, sys.split_vars))
        if (!c.is_zero_literal()) sys.equations.push_back({monomial_label(m), c, {}, {}});
    sys.functional_constraints.push_back({"omega", "omega(t-r, x(t-r)) = omega(t, x)", "4.6"});
    return sys;
}

namespace {

bool has_fields(const Expr& e) {
    std::vector<FnAtom> atoms;
    fn_atoms(e, atoms);
    return std::any_of(atoms.begin(), atoms.end(), [](const FnAtom& f) { return f.field; });
}

std::optional<std::string> plain_function_name(const Expr& e) {
    Expr n = normalize(e);
    if (n.kind() == Expr::Kind::Fn && !n.fn_atom().field && !n.fn_atom().delayed && n.fn_atom().dt == 0)
        return n.fn_atom().name;
    return std::nullopt;
}

Substitution spec_coefficients(const NdeSpec& spec) {
    Substitution s = spec.coefficient_binding();
    if (spec.k.kind == CoeffDescriptor::Kind::Constant) s.params["c2"] = spec.k.expr;
    if (!spec.r.symbolic) s.params["r"] = spec.r.expr();
    return s;
}

void tag_rows(DeterminingSystem& sys) {
    for (auto& e : sys.equations)
        if (e.tag.empty()) e.tag = match_reference(e.residual, sys.coefficients, e.label);
}

}  // namespace

DeterminingSystem split(const Expr& residual, const NdeSpec& spec, const InfinitesimalAnsatz& a) {
    DeterminingSystem sys;
    sys.equation = spec.equation();
    sys.ansatz = a;
    sys.coefficients = spec_coefficients(spec);
    sys.delay_symbolic = spec.r.symbolic;
    sys.delay = spec.r.expr();
    bool fields = has_fields(a.omega) || has_fields(a.upsilon);
    sys.split_vars = fields ? std::vector<Jet>{Jet::X1, Jet::X1R, Jet::X2R}
                            : std::vector<Jet>{Jet::X, Jet::XR, Jet::X1, Jet::X1R, Jet::X2R};
    for (const auto& [m, c] : collect(residual, sys.split_vars))
        if (!c.is_zero_literal()) sys.equations.push_back({monomial_label(m), c, {}, {}});
    sys.functional_constraints.push_back({"omega", "omega(t-r, x(t-r)) = omega(t, x)", "4.6"});

    Substitution rewrite;
    if (auto beta = plain_function_name(a.omega)) {
        sys.functional_constraints.push_back({*beta, *beta + "(t) = " + *beta + "(t-r)", "4.12"});
        sys.derivation.push_back("delay-point constraint with omega = " + *beta + "(t) gives " + *beta +
                                 "(t-r) = " + *beta + "(t)");
        add_periodic_rewrite(rewrite, *beta);

        // upsilon = gamma(t) x + rho(t): the x1 row integrates to gamma - beta'/2 = const,
        // so gamma inherits the periodicity of beta.
        auto parts = collect(a.upsilon, {Jet::X});
        JetMonomial lin{};
        lin[int(Jet::X)] = 1;
        auto gamma = parts.count(lin) ? plain_function_name(parts.at(lin)) : std::nullopt;
        if (gamma) {
            for (const auto& e : sys.equations) {
                if (e.label != "x1") continue;
                Expr row = substitute(e.residual, rewrite);
                std::vector<FnAtom> atoms;
                fn_atoms(row, atoms);
                bool only_ansatz = std::all_of(atoms.begin(), atoms.end(), [&](const FnAtom& f) {
                    return !f.delayed && (f.name == *beta || f.name == *gamma);
                });
                if (only_ansatz && first_integral(row)) {
                    sys.functional_constraints.push_back({*gamma, *gamma + "(t) = " + *gamma + "(t-r)", "4.15"});
                    sys.derivation.push_back("x1 row integrates to " + *gamma + " - " + *beta +
                                             "'/2 = const, hence " + *gamma + "(t-r) = " + *gamma + "(t)");
                    add_periodic_rewrite(rewrite, *gamma);
                }
            }
        }
    }
    if (!rewrite.atoms.empty()) {
        std::vector<DetEquation> kept;
        for (auto& e : sys.equations) {
            e.residual = substitute(e.residual, rewrite);
            if (!e.residual.is_zero_literal()) kept.push_back(e);
        }
        sys.equations = std::move(kept);
    }
    tag_rows(sys);
    return sys;
}

DeterminingSystem generic_system(const NdeSpec& spec) {
    InfinitesimalAnsatz a{Expr::field("omega"), Expr::field("upsilon"), {}};
    return split(invariance_residual(spec, a), spec, a);
}

// ---------------------------------------------------------------- reduction

DeterminingSystem reduce_ansatz(const DeterminingSystem& generic, const NdeSpec& spec) {
    std::vector<std::string> steps;
    std::vector<Assumption> assumptions;
    Expr k = spec.k.symbolic("k");
    Expr b = spec.b.symbolic("b");
    Expr d = spec.d.symbolic("d");

    auto row = [&](const std::string& label) -> Expr {
        const DetEquation* e = generic.find(label);
        return e ? e->residual : Expr();
    };
    auto require = [&](bool ok, const std::string& what) {
        if (!ok) throw std::logic_error("generic system does not have the expected " + what);
    };

    // omega affine in x
    if (!spec.k.is_zero()) {
        require(equivalent(row("x1r^3"), -k * omega_field(0, 2, true)), "x1r^3 row");
        steps.push_back("x1r^3: -k(t)*omega_xx(t-r,xr) = 0 with k != 0 gives omega_xx = 0, omega = alpha(t)*x + beta(t)");
        assumptions.push_back(Assumption::nonzero("k", "k not identically zero"));
    } else {
        require(equivalent(row("x1^3"), -omega_field(0, 2)), "x1^3 row");
        steps.push_back("x1^3: -omega_xx(t,x) = 0 gives omega = alpha(t)*x + beta(t)");
    }

    // omega independent of x
    if (!spec.k.is_zero()) {
        require(equivalent(row("x1*x2r"), Expr(3) * k * omega_field(0, 1)), "x1*x2r row");
        steps.push_back("x1*x2r: 3*k(t)*omega_x(t,x) = 0 with k != 0 gives omega_x = 0, omega = beta(t)");
    } else if (!spec.b.is_zero()) {
        require(equivalent(row("x1*x1r"), Expr(3) * b * omega_field(0, 1)), "x1*x1r row");
        steps.push_back("k = 0: the x1*x2 term -3*omega_x*x1*x2 with x2 replaced by the equation leaves "
                        "3*b(t)*omega_x(t,x) on x1*x1r; b != 0 gives omega_x = 0");
        assumptions.push_back(Assumption::nonzero("b", "omega_x elimination via the x1*x2 term (k = 0)"));
    } else if (!spec.d.is_zero()) {
        require(equivalent(diff(row("x1"), Jet::XR), Expr(3) * d * omega_field(0, 1)), "x1 row");
        steps.push_back("k = b = 0: the x1*x2 term leaves 3*d(t)*omega_x(t,x)*xr in the x1 row; d != 0 gives omega_x = 0");
        assumptions.push_back(Assumption::nonzero("d", "omega_x elimination via the x1*x2 term (k = b = 0)"));
    } else {
        throw std::domain_error("b = d = k = 0: ordinary equation, out of taxonomy");
    }

    // upsilon linear in x
    {
        Substitution s;
        s.functions["omega"] = Expr::fn("beta");
        require(equivalent(substitute(row("x1^2"), s), Expr::field("upsilon", 0, 2)), "x1^2 row");
        steps.push_back("x1^2: upsilon_xx - 2*omega_tx = 0 with omega = beta(t) gives upsilon = gamma(t)*x + rho(t)");
    }

    InfinitesimalAnsatz a{Expr::fn("beta"), normalize(Expr::fn("gamma") * Expr::x() + Expr::fn("rho")), {"c1"}};
    DeterminingSystem sys = split(invariance_residual(spec, a), spec, a);
    sys.derivation.insert(sys.derivation.begin(), steps.begin(), steps.end());
    sys.assumptions.insert(sys.assumptions.end(), assumptions.begin(), assumptions.end());

    Expr gamma_form = normalize(Expr(Rational(1, 2)) * (Expr::fn("beta", 1) + Expr::param("c1")));
    std::vector<DetEquation> extra;
    if (const DetEquation* e = sys.find("x1")) {
        auto A = first_integral(e->residual);
        require(A && proportional(*A, P("2*gamma(t) - beta'(t)")), "x1 row shape");
        extra.push_back({"x1 integrated", normalize(Expr::fn("gamma") - gamma_form), "4.14",
                         "first integral of the x1 row"});
        sys.derivation.push_back("x1: " + e->residual.str() + " = 0 integrates to gamma(t) = " + gamma_form.str());
    }
    if (const DetEquation* e = sys.find("x1r")) {
        Substitution g;
        g.atoms.push_back({FnAtom{"gamma", false, 1, 0, false}, normalize(Expr(Rational(1, 2)) * Expr::fn("beta", 2))});
        Expr row = substitute(e->residual, g);
        if (!structurally_equal(row, e->residual))
            extra.push_back({"x1r reduced", row, {}, "gamma' = beta''/2 from the x1 row"});
        auto A = row.is_zero_literal() ? std::nullopt : first_integral(row);
        if (A && !A->is_zero_literal()) {
            Expr integ = normalize(*A / Expr(leading_coefficient(*A)) - Expr::param("c3"));
            extra.push_back({"x1r integrated", integ, {}, "first integral of the x1r row"});
            sys.derivation.push_back("x1r: " + row.str() + " = 0 integrates to " + integ.str() + " = 0");
        }
    }
    if (const DetEquation* e = sys.find("xr")) {
        Substitution g;
        g.atoms.push_back({FnAtom{"gamma", false, 2, 0, false}, normalize(Expr(Rational(1, 2)) * Expr::fn("beta", 3))});
        Expr r2 = substitute(e->residual, g);
        if (!structurally_equal(r2, e->residual)) {
            extra.push_back({"xr reduced", r2, {}, "gamma'' = beta'''/2 from the x1 row"});
        }
    }
    for (auto& e : extra)
        if (!e.residual.is_zero_literal()) sys.equations.push_back(std::move(e));
    sys.upsilon_form = normalize(gamma_form * Expr::x() + Expr::fn("rho"));
    sys.ansatz = a;
    tag_rows(sys);
    return sys;
}

DeterminingSystem canonical_constraints(const DeterminingSystem& reduced, const NdeSpec& spec) {
    DeterminingSystem sys;
    sys.equation = reduced.equation;
    sys.coefficients = reduced.coefficients;
    sys.delay_symbolic = reduced.delay_symbolic;
    sys.delay = reduced.delay;
    sys.split_vars = reduced.split_vars;
    sys.assumptions = reduced.assumptions;
    sys.derivation = reduced.derivation;

    Substitution to_omega;
    to_omega.functions["beta"] = Expr::fn("omega");
    to_omega.functions["gamma"] = normalize(Expr(Rational(1, 2)) * (Expr::fn("omega", 1) + Expr::param("c1")));
    auto conv = [&](const Expr& e) { return substitute(e, to_omega); };

    sys.ansatz = {Expr::fn("omega"),
                  normalize(Expr(Rational(1, 2)) * (Expr::fn("omega", 1) + Expr::param("c1")) * Expr::x() +
                            Expr::fn("rho")),
                  {"c1"}};
    sys.upsilon_form = sys.ansatz.upsilon;
    sys.derivation.push_back("upsilon = " + sys.ansatz.upsilon.str() + "  (4.23)");
    sys.functional_constraints.push_back({"omega", "omega(t) = omega(t-r)", "4.12"});

    Expr k = spec.k.symbolic("k");
    bool k_generic = spec.k.kind == CoeffDescriptor::Kind::Numeric ||
                     (k.kind() == Expr::Kind::Fn && k.fn_atom().name == "k");
    bool k_nonconstant = false;
    if (spec.k.kind == CoeffDescriptor::Kind::Closed && !(k.kind() == Expr::Kind::Fn && k.fn_atom().name == "k")) {
        SampleOptions o;
        o.delay = spec.r.symbolic ? std::optional<double>() : spec.r.value();
        k_nonconstant = !is_zero(diff(k, Jet::T), {}, o).zero;
    }
    if (spec.k.kind == CoeffDescriptor::Kind::Numeric) {
        FnTable fns = spec.functions();
        SampleOptions o;
        o.fns = &fns;
        o.t_lo = spec.k.table->lo();
        o.t_hi = spec.k.table->hi();
        o.delay = spec.r.value();
        k_nonconstant = !is_zero(diff(k, Jet::T), {}, o).zero;
    }

    if (const DetEquation* e = reduced.find("x")) {
        sys.equations.push_back({"x", normalize(Expr(2) * conv(e->residual)), {}, {}});
    }
    if (const DetEquation* e = reduced.find("xr")) {
        Expr row = normalize(Expr(2) * conv(e->residual));
        sys.equations.push_back({"xr", row, {}, k_generic ? "pre-specialization form; k = c2 branch below" : ""});
        if (k_generic) {
            Substitution kc;
            kc.functions["k"] = Expr::param("c2");
            sys.equations.push_back({"xr (k = c2)", substitute(row, kc), "4.26", "constant-k branch"});
            sys.assumptions.push_back(Assumption::constant("k", "k = c2 branch of the xr row"));
        }
    }
    if (const DetEquation* e = reduced.find("x2r")) {
        std::string note = k_nonconstant ? "omega = 0 forced: k is nonconstant"
                                         : (k_generic ? "forces omega = 0 whenever k'(t) != 0" : "");
        sys.equations.push_back({"x2r", conv(e->residual), {}, note});
        if (k_nonconstant) sys.derivation.push_back("x2r: omega(t)*k'(t) = 0 with k nonconstant forces omega = 0");
    }
    if (const DetEquation* e = reduced.find("1")) sys.equations.push_back({"1", e->residual, {}, {}});
    if (const DetEquation* e = reduced.find("x1r")) {
        sys.equations.push_back({"x1r", conv(e->residual), {}, {}});
        if (!spec.b.is_zero()) {
            Expr b = spec.b.symbolic("b");
            Expr w = normalize(Expr::fn("omega") - Expr::param("c3") * pow(b, -1));
            sys.equations.push_back({"x1r integrated", w, {}, "requires b != 0"});
            sys.assumptions.push_back(Assumption::nonzero("b", "omega = c3/b"));
        }
    }
    std::erase_if(sys.equations, [](const DetEquation& e) { return e.residual.is_zero_literal(); });
    tag_rows(sys);
    if (!k_generic)
        for (auto& e : sys.equations)
            if (e.label == "xr" && e.tag == "4.20") e.tag = "4.26";
    return sys;
}

// ---------------------------------------------------------------- first integrals

std::optional<Expr> first_integral(const Expr& e, const Expr& multiplier) {
    Expr target = normalize(multiplier * e);
    if (target.is_zero_literal()) return Expr();

    auto admissible = [](const Expr& mono) {
        std::vector<Expr> fs = mono.kind() == Expr::Kind::Product ? mono.operands() : std::vector<Expr>{mono};
        for (const auto& f : fs) {
            if (f.is_constant() || f.kind() == Expr::Kind::Param || f.kind() == Expr::Kind::Fn) continue;
            if (f.kind() == Expr::Kind::Power && f.operands()[0].kind() == Expr::Kind::Fn && f.exponent() > 0) continue;
            return false;
        }
        return true;
    };

    std::map<Expr, Rational, ExprLess> tmap;
    for (const auto& term : terms_of(target)) {
        auto [q, m] = split_term(term);
        if (!admissible(m)) return std::nullopt;
        tmap[m] = q;
    }

    std::map<Expr, int, ExprLess> cand_idx;
    std::vector<Expr> cands;
    std::map<Expr, bool, ExprLess> lowered;
    auto lower = [&](const Expr& mono) {
        if (lowered.count(mono)) return;
        lowered[mono] = true;
        std::vector<Expr> fs = mono.kind() == Expr::Kind::Product ? mono.operands() : std::vector<Expr>{mono};
        for (const auto& f : fs) {
            const Expr& base = f.kind() == Expr::Kind::Power ? f.operands()[0] : f;
            if (base.kind() != Expr::Kind::Fn || base.fn_atom().dt == 0 || base.fn_atom().field) continue;
            FnAtom low = base.fn_atom();
            low.dt -= 1;
            Expr c = split_term(normalize(mono * Expr::fn(low) * pow(base, -1))).second;
            if (admissible(c) && !cand_idx.count(c)) {
                cand_idx[c] = int(cands.size());
                cands.push_back(c);
            }
        }
    };
    for (const auto& [m, q] : tmap) lower(m);
    size_t processed = 0;
    for (int round = 0; round < 3; ++round) {
        size_t end = cands.size();
        for (; processed < end; ++processed) {
            for (const auto& term : terms_of(diff(cands[processed], Jet::T))) {
                Expr m = split_term(term).second;
                if (!tmap.count(m)) lower(m);
            }
        }
    }
    if (cands.empty()) return std::nullopt;

    // Linear system: sum_j alpha_j d/dt cand_j = target, over monomials.
    std::map<Expr, int, ExprLess> row_idx;
    std::vector<std::map<int, Rational>> cols(cands.size());
    for (size_t j = 0; j < cands.size(); ++j) {
        for (const auto& term : terms_of(diff(cands[j], Jet::T))) {
            auto [q, m] = split_term(term);
            if (!row_idx.count(m)) row_idx.emplace(m, int(row_idx.size()));
            cols[j][row_idx.at(m)] += q;
        }
    }
    for (const auto& [m, q] : tmap)
        if (!row_idx.count(m)) row_idx.emplace(m, int(row_idx.size()));
    size_t R = row_idx.size(), C = cands.size();
    std::vector<std::vector<Rational>> M(R, std::vector<Rational>(C + 1, Rational(0)));
    for (size_t j = 0; j < C; ++j)
        for (const auto& [i, q] : cols[j]) M[i][j] = q;
    for (const auto& [m, q] : tmap) M[row_idx.at(m)][C] = q;

    std::vector<int> pivot_col;
    size_t r = 0;
    for (size_t c = 0; c < C && r < R; ++c) {
        size_t p = r;
        while (p < R && sgn(M[p][c]) == 0) ++p;
        if (p == R) continue;
        std::swap(M[p], M[r]);
        Rational inv = 1 / M[r][c];
        for (auto& v : M[r]) v *= inv;
        for (size_t i = 0; i < R; ++i) {
            if (i == r || sgn(M[i][c]) == 0) continue;
            Rational f = M[i][c];
            for (size_t k = c; k <= C; ++k) M[i][k] -= f * M[r][k];
        }
        pivot_col.push_back(int(c));
        ++r;
    }
    for (size_t i = r; i < R; ++i)
        if (sgn(M[i][C]) != 0) return std::nullopt;
    Expr A;
    for (size_t i = 0; i < pivot_col.size(); ++i)
        if (sgn(M[i][C]) != 0) A = A + Expr(M[i][C]) * cands[size_t(pivot_col[i])];
    A = normalize(A);
    if (!equivalent(diff(A, Jet::T), target)) return std::nullopt;
    return A;
}

// ---------------------------------------------------------------- zero test

Expr apply_assumptions(const Expr& e, const std::vector<Assumption>& assumptions) {
    Expr out = normalize(e);
    Substitution forms;
    for (const auto& a : assumptions)
        if (a.kind == Assumption::Kind::Form) forms.functions[a.fn] = a.form;
    if (!forms.functions.empty()) out = substitute(out, forms);

    for (const auto& a : assumptions) {
        if (a.kind != Assumption::Kind::Solves) continue;
        Expr F = solved_rhs({a.form});
        Substitution s;
        s.jets[Jet::X] = Expr::fn(a.fn, 0);
        s.jets[Jet::X1] = Expr::fn(a.fn, 1);
        s.jets[Jet::XR] = Expr::fn(a.fn, 0, true);
        s.jets[Jet::X1R] = Expr::fn(a.fn, 1, true);
        s.jets[Jet::X2R] = Expr::fn(a.fn, 2, true);
        Expr rhs = substitute(F, s);
        Substitution rw;
        rw.atoms.push_back({FnAtom{a.fn, false, 2, 0, false}, rhs});
        out = substitute(out, rw);
    }

    Substitution per;
    for (const auto& a : assumptions) {
        if (a.kind == Assumption::Kind::Periodic) add_periodic_rewrite(per, a.fn);
        if (a.kind == Assumption::Kind::Constant) {
            for (int n = 1; n <= kMaxDerivOrder; ++n) {
                per.atoms.push_back({FnAtom{a.fn, false, n, 0, false}, Expr()});
                per.atoms.push_back({FnAtom{a.fn, true, n, 0, false}, Expr()});
            }
            per.atoms.push_back({FnAtom{a.fn, true, 0, 0, false}, Expr::fn(a.fn)});
        }
    }
    if (!per.atoms.empty()) out = substitute(out, per);
    return out;
}

ZeroTest is_zero(const Expr& e, const std::vector<Assumption>& assumptions, const SampleOptions& opts) {
    ZeroTest res;
    Expr n = apply_assumptions(e, assumptions);
    if (n.is_zero_literal()) {
        res.zero = true;
        res.symbolic = true;
        return res;
    }

    std::vector<std::string> params;
    param_names(n, params);
    std::vector<std::string> free_params;
    for (const auto& p : params)
        if (p != "pi" && p != "r" && !opts.params.count(p)) free_params.push_back(p);

    double r = opts.delay ? *opts.delay : (opts.params.count("r") ? opts.params.at("r") : 0.8731);

    FnTable fns;
    if (opts.fns) fns = *opts.fns;
    std::vector<FnAtom> atoms;
    fn_atoms(n, atoms);
    std::mt19937_64 rng(opts.seed);
    auto has = [&](Assumption::Kind k, const std::string& f) {
        return std::any_of(assumptions.begin(), assumptions.end(),
                           [&](const Assumption& a) { return a.kind == k && a.fn == f; });
    };
    for (const auto& f : atoms) {
        if (fns.has(f.name)) continue;
        double period = has(Assumption::Kind::Periodic, f.name) ? r : 0;
        if (f.field) {
            auto inst = FieldInstance::random(rng, period);
            fns.fields[f.name] = inst;
        } else {
            auto inst = TrigInstance::random(rng, period, has(Assumption::Kind::Constant, f.name),
                                             has(Assumption::Kind::NonZero, f.name));
            fns.coeffs[f.name] = inst;
        }
    }

    int dim = 1 + 6 + int(free_params.size());
    Halton h(dim, opts.seed);
    for (int i = 0; i < opts.count; ++i) {
        auto p = h.point(i);
        EvalEnv env;
        env.fns = &fns;
        env.params = opts.params;
        env.params["r"] = r;
        env.set(Jet::T, opts.t_lo + (opts.t_hi - opts.t_lo) * p[0]);
        for (int j = 1; j < kJetCount; ++j) env.jets[j] = opts.jet_lo + (opts.jet_hi - opts.jet_lo) * p[size_t(j)];
        for (size_t q = 0; q < free_params.size(); ++q) env.params[free_params[q]] = -2 + 4 * p[7 + q];
        try {
            double v = eval_numeric(n, env);
            if (!std::isfinite(v)) {
                ++res.skipped;
                continue;
            }
            ++res.samples;
            res.max_abs = std::max(res.max_abs, std::abs(v));
        } catch (const DomainError&) {
            ++res.skipped;
        }
    }
    res.zero = res.samples > 0 && res.max_abs < opts.tol;
    return res;
}

// ---------------------------------------------------------------- reports

json to_json(const DeterminingSystem& sys) {
    json j;
    j["ansatz"] = {{"omega", sys.ansatz.omega.str()}, {"upsilon", sys.ansatz.upsilon.str()}};
    json vars = json::array();
    for (Jet v : sys.split_vars) vars.push_back(jet_name(v));
    j["split_vars"] = vars;
    json eqs = json::array();
    for (const auto& e : sys.equations) {
        json row = {{"monomial", e.label}, {"residual", e.residual.str()}};
        row["tag"] = e.tag.empty() ? json(nullptr) : json(tag_text(e.tag));
        if (!e.note.empty()) row["note"] = e.note;
        eqs.push_back(row);
    }
    j["equations"] = eqs;
    json fc = json::array();
    for (const auto& c : sys.functional_constraints)
        fc.push_back({{"function", c.fn}, {"constraint", c.text}, {"tag", tag_text(c.tag)}});
    j["functional_constraints"] = fc;
    json as = json::array();
    for (const auto& a : sys.assumptions) as.push_back(a.describe());
    j["assumptions"] = as;
    j["derivation"] = sys.derivation;
    if (sys.upsilon_form) j["upsilon_form"] = sys.upsilon_form->str();
    return j;
}

std::string render_text(const DeterminingSystem& sys) {
    std::ostringstream os;
    os << "ansatz: omega = " << sys.ansatz.omega.str() << ", upsilon = " << sys.ansatz.upsilon.str() << "\n";
    for (const auto& s : sys.derivation) os << "  * " << s << "\n";
    os << "equations:\n";
    for (const auto& e : sys.equations) {
        os << "  [" << e.label << "] " << e.residual.str() << " = 0";
        if (!e.tag.empty()) os << "   " << tag_text(e.tag);
        if (!e.note.empty()) os << "   -- " << e.note;
        os << "\n";
    }
    if (!sys.functional_constraints.empty()) {
        os << "functional constraints:\n";
        for (const auto& c : sys.functional_constraints) os << "  " << c.text << "   " << tag_text(c.tag) << "\n";
    }
    if (!sys.assumptions.empty()) {
        os << "assumptions:\n";
        for (const auto& a : sys.assumptions) os << "  " << a.describe() << "\n";
    }
    return os.str();
}

}  // namespace ndelie
