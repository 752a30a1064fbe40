#pragma once

#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "ndelie/eval.hpp"
#include "ndelie/expr.hpp"
#include "ndelie/numeric_function.hpp"
#include "ndelie/prolong.hpp"

namespace ndelie {

/// One coefficient of x'' + a x' + b x'(t-r) + c x + d x(t-r) + k x''(t-r) = h.
struct CoeffDescriptor {
    enum class Kind { Zero, Constant, Closed, Numeric };

    Kind kind = Kind::Zero;
    Expr expr;  // Constant: rational or named parameter; Closed: expression in t
    std::shared_ptr<const NumericFunction> table;
    std::optional<bool> nonvanishing;

    static CoeffDescriptor zero() { return {}; }
    static CoeffDescriptor constant(const Rational& q);
    static CoeffDescriptor named(const std::string& param);
    static CoeffDescriptor closed(const Expr& e);
    static CoeffDescriptor closed(const std::string& text);
    static CoeffDescriptor numeric(std::shared_ptr<const NumericFunction> f);

    bool is_zero() const { return kind == Kind::Zero; }
    /// Symbolic stand-in. Numeric descriptors become the function atom `slot(t)`.
    Expr symbolic(const std::string& slot) const;
    std::string describe(const std::string& slot) const;
};

/// Delay: exact rational multiple of 1 or of pi, or left symbolic.
struct Delay {
    Rational coef = 1;
    bool times_pi = false;
    bool symbolic = false;

    double value() const;
    Expr expr() const;
    std::string str() const;
    static Delay parse(const std::string& text);
};

struct NdeSpec {
    std::string name;
    CoeffDescriptor a, b, c, d, k, h;
    Delay r;
    double t0 = 0;
    std::optional<double> t_end;

    static constexpr const char* kSlots = "abcdkh";
    CoeffDescriptor& slot(char s);
    const CoeffDescriptor& slot(char s) const;

    /// delta = x2 + a x1 + b x1r + c x + d xr + k x2r - h, delay kept as parameter r.
    EquationResidual equation() const;
    /// Bindings for numeric descriptors, keyed by slot name.
    FnTable functions() const;
    /// Substitution r -> delay value (empty when symbolic).
    Substitution delay_binding() const;
    /// Coefficient expressions by slot, used to specialize templates.
    Substitution coefficient_binding() const;
    std::map<std::string, double> numeric_params() const;

    bool reduced() const { return a.is_zero() && h.is_zero(); }

    /// All coefficients unknown functions of t, a = h = 0, symbolic delay.
    static NdeSpec generic();
};

Expr bind_delay(const Expr& e, const NdeSpec& spec);

struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

NdeSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const NdeSpec& s);
NdeSpec load_spec(const std::string& path);

}  // namespace ndelie
