#pragma once

#include <string>
#include <string_view>

#include "ndelie/expr.hpp"

namespace ndelie {

struct ParseError : SymbolicError {
    ParseError(const std::string& msg, size_t pos)
        : SymbolicError(msg + " at position " + std::to_string(pos)), position(pos) {}
    size_t position;
};

struct UnknownIdentifier : ParseError {
    UnknownIdentifier(const std::string& name, size_t pos)
        : ParseError("unknown identifier '" + name + "'", pos), identifier(name) {}
    std::string identifier;
};

/// Grammar: sums/products/quotients, `^` with an integer exponent (binds
/// tighter than `*`), unary minus, decimal or integer literals (kept exact),
/// jets t x xr x1 x1r x2 x2r (also x' x'' and x(t-r) forms), parameters
/// c1..c99, r, pi, elementary sin cos exp ln sqrt, coefficient functions
/// name'(t) / name(t-r), and fields name_tx(t,x) / name(t-r,xr).
Expr parse(std::string_view text);

}  // namespace ndelie
