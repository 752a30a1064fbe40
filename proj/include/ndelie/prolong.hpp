#pragma once

#include <string>
#include <vector>

#include "ndelie/expr.hpp"

namespace ndelie {

/// Infinitesimals (omega, upsilon) of a point transformation in (t, x).
struct InfinitesimalAnsatz {
    Expr omega;
    Expr upsilon;
    std::vector<std::string> free_params;
};

/// Throws std::invalid_argument unless omega, upsilon involve only t, x and
/// undelayed atoms.
void validate(const InfinitesimalAnsatz& a);

/// Zero set of delta is the equation; solved form x2 = F must be available.
struct EquationResidual {
    Expr delta;
};

struct Prolongation {
    Expr ups_t;
    Expr ups_tt;
    Expr omega_r;
    Expr upsilon_r;
    Expr ups_t_r;
    Expr ups_tt_r;
};

struct DelayedProlongation {
    Expr omega_r;
    Expr upsilon_r;
    Expr ups_t_r;
    Expr ups_tt_r;
};

/// D_t = d/dt + x1 d/dx + x2 d/dx1.
Expr total_derivative(const Expr& e);

Expr prolong_first(const InfinitesimalAnsatz& a);
Expr prolong_second(const InfinitesimalAnsatz& a);
DelayedProlongation prolong_delayed(const InfinitesimalAnsatz& a);
Prolongation prolong(const InfinitesimalAnsatz& a);

/// F with delta = q*(x2 - F), q a nonzero rational. Throws otherwise.
Expr solved_rhs(const EquationResidual& eq);

/// Extended operator applied to delta, before eliminating x2.
Expr apply_operator_raw(const InfinitesimalAnsatz& a, const EquationResidual& eq);

/// Extended operator applied to delta with x2 replaced by F afterwards.
Expr apply_operator(const InfinitesimalAnsatz& a, const EquationResidual& eq);

}  // namespace ndelie
