#pragma once

#include <cmath>
#include <random>

#include "ndelie/eval.hpp"
#include "ndelie/expr.hpp"

namespace testsupport {

using namespace ndelie;

/// Random expression trees for property tests.
struct TreeGen {
    std::mt19937_64 rng;
    bool allow_delayed = true;
    bool jets_in_apply = true;  // false keeps the tree polynomial in the jets
    int max_nodes = 24;
    int nodes = 0;

    explicit TreeGen(std::uint64_t seed) : rng(seed) {}

    int pick(int n) { return int(std::uniform_int_distribution<int>(0, n - 1)(rng)); }

    Expr atom(bool jets_ok) {
        switch (pick(jets_ok ? 7 : 4)) {
            case 0: return Expr(Rational(pick(7) - 3, pick(3) + 1));
            case 1: return Expr::param(pick(2) ? "c1" : "c2");
            case 2: return Expr::fn("b", pick(2), allow_delayed && pick(4) == 0);
            case 3: return Expr::t();
            case 4: return Expr::x();
            case 5: return Expr::jet(Jet::X1);
            default: return Expr::jet(allow_delayed ? Jet::XR : Jet::X2);
        }
    }

    Expr tree(int depth, bool jets_ok = true) {
        ++nodes;
        if (depth <= 0 || nodes > max_nodes || pick(4) == 0) return atom(jets_ok);
        switch (pick(6)) {
            case 0:
            case 1: return tree(depth - 1, jets_ok) + tree(depth - 1, jets_ok);
            case 2:
            case 3: return tree(depth - 1, jets_ok) * tree(depth - 1, jets_ok);
            case 4: {
                int n = pick(3) + 1;
                return pow(tree(depth - 1, jets_ok), n);
            }
            default: {
                Elementary f = pick(2) ? Elementary::Sin : (pick(2) ? Elementary::Cos : Elementary::Exp);
                Expr inner = tree(depth - 2, jets_ok && jets_in_apply);
                return Expr::apply(f, inner);
            }
        }
    }

    Expr make(int depth) {
        nodes = 0;
        return tree(depth);
    }
};

/// Smooth test function with exact derivatives: a0 + sum a_i sin(w_i t + p_i).
struct TrigFn {
    double a0 = 0;
    std::vector<double> amp, freq, phase;

    double operator()(double t, int order) const {
        double v = order == 0 ? a0 : 0.0;
        for (size_t i = 0; i < amp.size(); ++i) {
            double w = freq[i];
            v += amp[i] * std::pow(w, order) * std::sin(w * t + phase[i] + order * M_PI / 2);
        }
        return v;
    }

    static TrigFn random(std::mt19937_64& rng, double period = 0, bool constant = false, double offset = 0) {
        std::uniform_real_distribution<double> u(-1, 1);
        TrigFn f;
        f.a0 = u(rng) + offset;
        if (constant) return f;
        for (int i = 0; i < 2; ++i) {
            f.amp.push_back(u(rng) * 0.8);
            f.freq.push_back(period > 0 ? 2 * M_PI * (i + 1) / period : 0.4 + 1.2 * std::abs(u(rng)));
            f.phase.push_back(3 * u(rng));
        }
        return f;
    }
};

/// Field instance of (t, x): polynomial in x of degree 2 with trig coefficients.
struct FieldFn {
    std::array<TrigFn, 3> c;
    double operator()(double t, double x, int dt, int dx) const {
        double v = 0;
        for (int k = dx; k < 3; ++k) {
            double fac = 1;
            for (int j = 0; j < dx; ++j) fac *= (k - j);
            v += c[k](t, dt) * fac * std::pow(x, k - dx);
        }
        return v;
    }
};

inline FnTable table_with_b() {
    FnTable t;
    t.coeffs["b"] = [](double s, int k) {
        return (k == 0 ? 2.0 : 0.0) + std::pow(1.3, k) * std::sin(1.3 * s + k * M_PI / 2);
    };
    return t;
}

inline EvalEnv random_env(std::mt19937_64& rng, const FnTable* fns) {
    std::uniform_real_distribution<double> u(-2, 2);
    EvalEnv env;
    env.fns = fns;
    for (int i = 0; i < kJetCount; ++i) env.jets[i] = u(rng);
    env.jets[0] = 0.1 + std::abs(u(rng)) * 1.9;
    env.params["c1"] = u(rng);
    env.params["c2"] = u(rng);
    env.params["r"] = 0.7;
    return env;
}

}  // namespace testsupport
