#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ndelie/classify.hpp"
#include "ndelie/ndesolve.hpp"

namespace ndelie {

struct FlowOptions {
    int substeps = 64;          // RK4 steps in delta
    double delta_bound = 1.0;
};

/// omega, upsilon with first and second partials in (t, x), evaluated
/// against a function table.
class GeneratorField {
public:
    GeneratorField(const Generator& g, FnTable fns);

    struct Jet2 {
        std::array<double, 2> f;                 // (omega, upsilon)
        std::array<std::array<double, 2>, 2> df;  // df[i][j] = d f_i / d q_j, q = (t, x)
        std::array<std::array<std::array<double, 2>, 2>, 2> d2f;
    };
    std::array<double, 2> value(double t, double x) const;
    Jet2 jet(double t, double x) const;

private:
    std::array<Expr, 2> f_;
    std::array<std::array<Expr, 2>, 2> df_;
    std::array<std::array<std::array<Expr, 2>, 2>, 2> d2f_;
    FnTable fns_;
    double eval(const Expr& e, double t, double x) const;
};

struct FlowPoint {
    double t = 0, x = 0;
    bool ok = true;
};

/// Lie equations dt/d delta = omega, dx/d delta = upsilon by RK4.
std::vector<FlowPoint> flow(const GeneratorField& field, const std::vector<std::pair<double, double>>& points, double delta,
                            const FlowOptions& opts = {});

/// (t, x, x', x'') of a curve point.
struct CurvePoint {
    double t = 0, x = 0, v = 0, a = 0;
};

/// Image of a curve point with the transformed slope and curvature, from the
/// first and second variational equations of the flow.
CurvePoint flow_curve_point(const GeneratorField& field, const CurvePoint& p, double delta, const FlowOptions& opts = {});

/// Transformed curve xbar(tau): quintic Hermite on the image of each grid
/// segment, with one-sided data at breakpoints.
class TransformedCurve {
public:
    double operator()(double tau, int order) const;
    double lo() const { return pieces_.front().first.t; }
    double hi() const { return pieces_.back().second.t; }
    const std::vector<double>& breaks() const { return breaks_; }
    bool monotone = true;

private:
    friend TransformedCurve transform_solution(const Trajectory&, const GeneratorField&, double, const FlowOptions&);
    std::vector<std::pair<CurvePoint, CurvePoint>> pieces_;
    std::vector<double> breaks_;  // images of t0 + m*r
};

TransformedCurve transform_solution(const Trajectory& traj, const GeneratorField& field, double delta,
                                    const FlowOptions& opts = {});

/// Function table for checks: spec coefficients, generator bindings and rho.
FnTable check_functions(const NdeSpec& spec, const Generator& g, const Trajectory* rho);

struct InfinitesimalResult {
    double residual = 0;    // max |zeta Delta|
    double scale = 0;       // max sum of |terms| of zeta Delta
    double normalized = 0;  // residual / max(1, scale)
};

/// zeta Delta along the trajectory at the samples. The residual is linear in
/// the solution, so it is also reported relative to the size of its terms.
InfinitesimalResult infinitesimal_check(const Trajectory& traj, const Generator& g, const NdeSpec& spec, const FnTable& fns,
                           const std::vector<double>& samples);

struct FiniteResult {
    double delta = 0;
    double residual = 0;    // max |R|
    double scale = 0;       // max sum of |terms|
    double normalized = 0;  // residual / max(1, scale)
    int samples = 0;
    bool monotone = true;
    std::string error;
};

FiniteResult finite_residual(const Trajectory& traj, const GeneratorField& field, const NdeSpec& spec, double delta,
                             const FlowOptions& opts = {});

struct InvarianceReport {
    std::string label;
    std::string generator;
    double infinitesimal_residual = 0;  // normalized
    InfinitesimalResult infinitesimal;
    double finite_residual = 0;  // max normalized over the delta grid
    bool transformed_monotone = true;
    std::vector<FiniteResult> finite;
    double tol_inf = 1e-6, tol_fin = 1e-4;
    bool inf_pass = false, fin_pass = false;
    bool passed() const { return inf_pass && fin_pass; }
};

struct VerifyOptions {
    std::vector<double> deltas{-0.25, 0.25};
    double tol_inf = 1e-6;
    double tol_fin = 1e-4;
    FlowOptions flow;
};

InvarianceReport verify_generator(const Trajectory& traj, const Generator& g, const NdeSpec& spec, const Trajectory* rho,
                                  const VerifyOptions& opts = {});

struct AxiomReport {
    double identity = 0;  // max |flow(0) - id|
    double inverse = 0;   // max |flow(-d) o flow(d) - id|
    double closure = 0;   // max |flow(d2) o flow(d1) - flow(d1 + d2)|
    bool passed(double tol = 1e-7) const { return identity <= 1e-12 && inverse <= tol && closure <= tol; }
};

AxiomReport group_axioms(const GeneratorField& field, const std::vector<std::pair<double, double>>& points, double d1,
                         double d2, const FlowOptions& opts = {});

nlohmann::json to_json(const InvarianceReport& r);
nlohmann::json to_json(const AxiomReport& r);

}  // namespace ndelie
