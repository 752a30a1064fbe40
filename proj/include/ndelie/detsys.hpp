#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ndelie/eval.hpp"
#include "ndelie/expr.hpp"
#include "ndelie/prolong.hpp"
#include "ndelie/spec.hpp"

namespace ndelie {

struct Assumption {
    enum class Kind { NonZero, Constant, Form, Solves, Periodic };
    Kind kind;
    std::string fn;
    Expr form;  // Form: replacement in t; Solves: equation residual in jets
    std::string note;

    static Assumption nonzero(const std::string& f, std::string note = {});
    static Assumption constant(const std::string& f, std::string note = {});
    static Assumption form_of(const std::string& f, const Expr& e, std::string note = {});
    static Assumption solves(const std::string& f, const Expr& delta, std::string note = {});
    static Assumption periodic(const std::string& f, std::string note = {});
    std::string describe() const;
};

/// f(t) = f(t - r), checked numerically rather than solved.
struct FunctionalConstraint {
    std::string fn;
    std::string text;
    std::string tag;
};

struct DetEquation {
    std::string label;  // jet monomial or derived-row name
    Expr residual;
    std::string tag;    // reference equation tag when matched, e.g. "4.14"
    std::string note;
};

struct DeterminingSystem {
    EquationResidual equation;
    InfinitesimalAnsatz ansatz;
    std::vector<Jet> split_vars;
    std::vector<DetEquation> equations;
    std::vector<Assumption> assumptions;
    std::vector<FunctionalConstraint> functional_constraints;
    std::vector<std::string> derivation;
    std::optional<Expr> upsilon_form;
    Substitution coefficients;  // spec coefficient bindings for template matching
    bool delay_symbolic = true;
    Expr delay = Expr::delay();

    const DetEquation* find(const std::string& label) const;
    const DetEquation* find_tag(const std::string& tag) const;
};

/// Extended operator applied to the spec equation; requires a reduced spec.
Expr invariance_residual(const NdeSpec& spec, const InfinitesimalAnsatz& a);

/// Collects the residual by jet monomials. With a context the delay-point
/// constraint omega(t-r) = omega(t) is recorded (and applied when omega is an
/// x-free function), and rows are tagged against the reference table.
DeterminingSystem split(const Expr& residual);
DeterminingSystem split(const Expr& residual, const NdeSpec& spec, const InfinitesimalAnsatz& a);

/// Generic-ansatz system for the spec: omega(t,x), upsilon(t,x) unknown.
DeterminingSystem generic_system(const NdeSpec& spec);

/// Eliminations omega_xx = 0, omega_x = 0, upsilon_xx = 0, then the system for
/// omega = beta(t), upsilon = gamma(t) x + rho(t) with its first integrals.
DeterminingSystem reduce_ansatz(const DeterminingSystem& generic, const NdeSpec& spec);

/// Rewrites the reduced system in terms of omega(t) with gamma eliminated.
DeterminingSystem canonical_constraints(const DeterminingSystem& reduced, const NdeSpec& spec);

/// Exact antiderivative A with dA/dt = multiplier * e, found over a candidate
/// basis of lowered monomials and verified by differentiation.
std::optional<Expr> first_integral(const Expr& e, const Expr& multiplier = Expr(1));

struct SampleOptions {
    int count = 64;
    double tol = 1e-9;
    double t_lo = 0.1;
    double t_hi = 4.0;
    double jet_lo = -2;
    double jet_hi = 2;
    std::uint64_t seed = 0x51ed5eedULL;
    const FnTable* fns = nullptr;
    std::map<std::string, double> params;
    std::optional<double> delay;
    bool relative = false;  // compare against the magnitude of the term sum
};

struct ZeroTest {
    bool zero = false;
    bool symbolic = false;
    int samples = 0;
    int skipped = 0;
    double max_abs = 0;
    std::string method() const { return symbolic ? "symbolic" : "sampled"; }
};

/// Rewrites e under the assumptions (forms, solved equations, constancy,
/// periodicity).
Expr apply_assumptions(const Expr& e, const std::vector<Assumption>& assumptions);

ZeroTest is_zero(const Expr& e, const std::vector<Assumption>& assumptions = {}, const SampleOptions& opts = {});

/// Reference rows tagged against; exposed for reports and tests.
struct ReferenceRow {
    std::string tag;
    Expr form;
    std::string home;  // row label the template normally appears on
};
const std::vector<ReferenceRow>& reference_table();
/// First template proportional to the residual; templates whose home label
/// equals `label` are tried first.
std::string match_reference(const Expr& residual, const Substitution& coefficients, const std::string& label = {});

nlohmann::json to_json(const DeterminingSystem& sys);
std::string render_text(const DeterminingSystem& sys);

}  // namespace ndelie
