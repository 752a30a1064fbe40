#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ndelie {

/// Halton point in [0,1)^dim with a scrambling offset (Cranley-Patterson).
class Halton {
public:
    Halton(int dim, std::uint64_t seed);
    std::vector<double> point(int index) const;

private:
    std::vector<double> shift_;
};

/// a0 + sum a_i sin(w_i t + p_i) with exact derivatives of any order.
struct TrigInstance {
    double a0 = 0;
    std::vector<double> amp, freq, phase;

    double operator()(double t, int order) const;

    /// period > 0 makes the instance periodic with that period.
    static TrigInstance random(std::mt19937_64& rng, double period, bool constant, bool nonvanishing);
};

/// Quadratic polynomial in x with trig coefficients in t.
struct FieldInstance {
    std::array<TrigInstance, 3> coef;
    double operator()(double t, double x, int dt, int dx) const;
    static FieldInstance random(std::mt19937_64& rng, double period);
};

}  // namespace ndelie
