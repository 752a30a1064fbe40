#pragma once

#include <gmpxx.h>

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ndelie {

using Rational = mpq_class;

/// Jet coordinates. The delayed ones are independent symbols.
enum class Jet : std::uint8_t { T, X, XR, X1, X1R, X2, X2R };
constexpr int kJetCount = 7;

enum class Elementary : std::uint8_t { Sin, Cos, Exp, Ln, Sqrt };

/// Named function atom. Coefficient functions depend on t only; fields
/// (the unknown infinitesimals of the generic ansatz) depend on (t, x).
struct FnAtom {
    std::string name;
    bool delayed = false;
    int dt = 0;
    int dx = 0;
    bool field = false;

    int order() const { return dt + dx; }
    bool operator==(const FnAtom&) const = default;
};

constexpr int kMaxDerivOrder = 3;

struct SymbolicError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DerivativeOrderError : SymbolicError {
    using SymbolicError::SymbolicError;
};
struct DoubleShiftError : SymbolicError {
    using SymbolicError::SymbolicError;
};
struct NonPolynomialError : SymbolicError {
    using SymbolicError::SymbolicError;
};

struct Node;

class Expr {
public:
    enum class Kind : std::uint8_t { Constant, Param, Fn, JetVar, Apply, Power, Product, Sum };

    Expr();  // zero
    Expr(long v);
    Expr(const Rational& q);

    static Expr constant(const Rational& q);
    static Expr param(std::string name, std::optional<Rational> value = std::nullopt);
    static Expr jet(Jet j);
    static Expr fn(FnAtom f);
    static Expr fn(std::string name, int dt = 0, bool delayed = false);
    static Expr field(std::string name, int dt = 0, int dx = 0, bool delayed = false);
    static Expr sum(std::vector<Expr> terms);
    static Expr product(std::vector<Expr> factors);
    static Expr power(Expr base, int exponent);
    static Expr apply(Elementary f, Expr arg);

    static Expr t() { return jet(Jet::T); }
    static Expr x() { return jet(Jet::X); }
    static Expr pi() { return param("pi"); }
    static Expr delay() { return param("r"); }

    Kind kind() const;
    const Node& node() const { return *node_; }

    bool is_constant() const { return kind() == Kind::Constant; }
    bool is_zero_literal() const;
    bool is_one_literal() const;
    const Rational& value() const;         // Constant
    const std::string& name() const;       // Param
    const std::optional<Rational>& binding() const;  // Param
    Jet jet_tag() const;                   // JetVar
    const FnAtom& fn_atom() const;         // Fn
    Elementary elementary() const;         // Apply
    const std::vector<Expr>& operands() const;  // Sum, Product, Power [base], Apply [arg]
    int exponent() const;                  // Power

    std::string str() const;

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a);
    Expr& operator+=(const Expr& o) { return *this = *this + o; }
    Expr& operator-=(const Expr& o) { return *this = *this - o; }
    Expr& operator*=(const Expr& o) { return *this = *this * o; }

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

struct Node {
    Expr::Kind kind;
    Rational value;
    std::string name;
    std::optional<Rational> binding;
    Jet jet = Jet::T;
    FnAtom fn;
    Elementary elem = Elementary::Sin;
    int exponent = 0;
    std::vector<Expr> args;
};

Expr pow(const Expr& base, int n);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr exp(const Expr& e);
Expr ln(const Expr& e);
Expr sqrt(const Expr& e);

/// Total order on expressions; defines canonical product and sum ordering.
int compare(const Expr& a, const Expr& b);
struct ExprLess {
    bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};
bool structurally_equal(const Expr& a, const Expr& b);

Expr normalize(const Expr& e);
bool equivalent(const Expr& a, const Expr& b);  // normal forms identical

/// Differentiation targets. TNow and TDelayed split the explicit time
/// dependence between undelayed and delayed atoms; TAll is the ordinary
/// partial in t (chain rule through t-r included).
struct DiffVar {
    enum class Mode : std::uint8_t { JetVar, TAll, TNow, TDelayed };
    Mode mode = Mode::TAll;
    Jet jet = Jet::T;

    static DiffVar of(Jet j) {
        if (j == Jet::T) return {Mode::TAll, Jet::T};
        return {Mode::JetVar, j};
    }
    static DiffVar t_now() { return {Mode::TNow, Jet::T}; }
    static DiffVar t_delayed() { return {Mode::TDelayed, Jet::T}; }
};

Expr diff(const Expr& e, DiffVar v);
inline Expr diff(const Expr& e, Jet j) { return diff(e, DiffVar::of(j)); }

/// Delay shift t -> t-r on every atom.
Expr shift(const Expr& e);

struct Substitution {
    std::map<Jet, Expr> jets;
    std::map<std::string, Expr> params;
    /// Function bindings f -> expression in t (and x for fields); derivatives
    /// and delays of f are obtained by differentiating/shifting the binding.
    std::map<std::string, Expr> functions;
    /// Exact atom rewrites, matched on all FnAtom fields.
    std::vector<std::pair<FnAtom, Expr>> atoms;
};

Expr substitute(const Expr& e, const Substitution& s);

using JetMonomial = std::array<int, kJetCount>;
std::string monomial_label(const JetMonomial& m);
Expr monomial_expr(const JetMonomial& m);

/// Coefficients of e as a polynomial in `vars`. Always contains the constant
/// monomial. Throws NonPolynomialError when a var occurs non-polynomially.
std::map<JetMonomial, Expr> collect(const Expr& e, const std::vector<Jet>& vars);

bool depends_on(const Expr& e, Jet j);
bool has_delayed_atoms(const Expr& e);
bool contains_fn(const Expr& e, const std::string& name);
void fn_atoms(const Expr& e, std::vector<FnAtom>& out);
void param_names(const Expr& e, std::vector<std::string>& out);

std::string jet_name(Jet j);
std::string elementary_name(Elementary f);

}  // namespace ndelie
