#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "ndelie/expr.hpp"

namespace ndelie {

/// f(t, order) for a coefficient function of t.
using CoeffCallable = std::function<double(double, int)>;
/// f(t, x, dt, dx) for a field of (t, x).
using FieldCallable = std::function<double(double, double, int, int)>;

struct FnTable {
    std::map<std::string, CoeffCallable> coeffs;
    std::map<std::string, FieldCallable> fields;

    bool has(const std::string& name) const { return coeffs.count(name) || fields.count(name); }
    void merge(const FnTable& o) {
        for (const auto& [k, v] : o.coeffs) coeffs[k] = v;
        for (const auto& [k, v] : o.fields) fields[k] = v;
    }
};

struct UnboundAtom : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EvalEnv {
    std::array<std::optional<double>, kJetCount> jets{};
    std::map<std::string, double> params;
    const FnTable* fns = nullptr;

    EvalEnv& set(Jet j, double v) {
        jets[int(j)] = v;
        return *this;
    }
    EvalEnv& set(const std::string& p, double v) {
        params[p] = v;
        return *this;
    }
};

double eval_numeric(const Expr& e, const EvalEnv& env);

/// Convenience for expressions in t alone.
double eval_at(const Expr& e, double t, const std::map<std::string, double>& params = {},
               const FnTable* fns = nullptr);

}  // namespace ndelie
