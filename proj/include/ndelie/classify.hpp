#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ndelie/detsys.hpp"
#include "ndelie/numeric_function.hpp"
#include "ndelie/spec.hpp"

namespace ndelie {

enum class CaseId { C1 = 1, C2, C3, C4, C5, C6, C7, C8, C9, C10, C11, C12 };
std::string case_name(CaseId c);
std::optional<CaseId> parse_case(const std::string& s);

/// omega d/dt + upsilon d/dx. Numeric generators reference tabulated
/// functions through `bindings` (omega = w1(t), ...).
struct Generator {
    enum class Kind { Closed, Parametric, Numeric };
    enum class Status { Admitted, Candidate };

    std::string label;
    Expr omega;
    Expr upsilon;
    Kind kind = Kind::Closed;
    Status status = Status::Admitted;
    std::string note;  // constant conventions and verification summary
    FnTable bindings;
    std::vector<std::shared_ptr<const NumericFunction>> tables;
    double check_residual = 0;  // max sampled invariance residual

    InfinitesimalAnsatz ansatz() const { return {omega, upsilon, {}}; }
    std::string render() const;
};

std::string kind_name(Generator::Kind k);
std::string status_name(Generator::Status s);

struct Compatibility {
    std::string name;
    std::string formula;
    bool satisfied = true;
    double deviation = 0;  // spread of the quantity that must be constant
    std::string note;
};

struct ClassificationResult {
    std::optional<CaseId> case_id;  // nullopt: out of taxonomy
    std::string out_of_taxonomy;
    std::vector<std::string> trace;
    std::vector<Generator> generators;
    std::vector<Compatibility> compatibility;
    std::vector<std::string> warnings;
    std::vector<Assumption> assumptions;
    NdeSpec spec;  // the reduced spec that was classified

    std::vector<const Generator*> admitted() const;
};

struct ClassifyOptions {
    double numeric_tol = 1e-6;   // invariance tolerance for numeric omega
    int omega_steps_per_delay = 512;
    double null_tol = 1e-6;      // singular value threshold for periodic omega
};

/// Sample window used for checks on this spec: [t0 + r, t0 + r + span], kept
/// inside any numeric coefficient table.
SampleOptions sample_window(const NdeSpec& spec, double span = 3.0);

/// Case predicate only, with the trace of the tests made.
std::optional<CaseId> case_of(const NdeSpec& spec, std::vector<std::string>* trace = nullptr);

ClassificationResult classify(const NdeSpec& spec, const ClassifyOptions& opts = {});

nlohmann::json to_json(const ClassificationResult& r);
std::string render_text(const ClassificationResult& r);

// ---------------------------------------------------------------- reductions

struct Homogenized {
    NdeSpec spec;        // h = 0
    Expr particular;     // closed x1(t), or p(t) bound in `bindings`
    FnTable bindings;
    double residual = 0; // max residual of the particular solution
};

/// x = xbar + particular. The particular must solve the full equation to 1e-6.
Homogenized homogenize(const NdeSpec& spec, const Expr& particular, const FnTable& bindings = {});

struct FirstDerivativeRemoval {
    NdeSpec spec;      // a = 0
    Expr s;            // x = u * s(t); closed, or s(t) bound in `bindings`
    FnTable bindings;
    bool closed = true;
};

/// Substitution x = s(t) u with s = exp(-1/2 int a), s0 = 0.
FirstDerivativeRemoval remove_first_derivative(const NdeSpec& spec);

// ---------------------------------------------------------------- omega equations

/// OmegaB:         c2 omega omega''' + c3 omega'' = 0
/// OmegaBUnit:     the same with c2 = c3 = 1
/// OmegaD:         c2 omega''' + 2 d' omega + 4 d omega' = 0
/// OmegaDIntegral: c2 omega omega'' - c2 omega'^2/2 + 2 omega^2 d = C
/// OmegaCIntegral: omega omega'' - omega'^2/2 + 2 c omega^2 = C
/// For the integral forms C comes from the initial data.
enum class OmegaEq { OmegaB, OmegaBUnit, OmegaD, OmegaDIntegral, OmegaCIntegral };

struct OmegaParams {
    double c2 = 1;
    double c3 = 1;
    CoeffCallable d;  // OmegaD, OmegaDIntegral
    CoeffCallable c;  // OmegaCIntegral
};

struct OmegaSolution {
    std::shared_ptr<NumericFunction> table;  // omega and derivatives up to 3
    bool truncated = false;
    std::string warning;
    double invariant_drift = 0;  // first-integral forms: max relative drift
};

/// RK4 from (omega, omega', omega'') at grid.front(); four substeps per grid
/// interval. Forms that divide by omega stop where |omega| gets small.
OmegaSolution omega_ode_solve(OmegaEq eq, const OmegaParams& p, const std::array<double, 3>& init,
                              const std::vector<double>& grid);

/// c(t) compatible with omega through omega''' + 4 c omega' + 2 c' omega = 0:
/// c = (K + omega'^2/2 - omega*omega'')/(2 omega^2), K fixed by c(t0).
struct CompatibleC {
    enum class Kind { Free, Closed, Numeric } kind = Kind::Free;
    Expr closed;  // in terms of the constant K
    std::function<double(double)> numeric;
    double K = 0;
};
CompatibleC compatibility_c(const Expr& omega, const FnTable* fns, std::optional<double> c_t0, double t0);

/// Callable for a coefficient slot with derivatives up to 3.
CoeffCallable coefficient_callable(const NdeSpec& spec, char slot);

}  // namespace ndelie
