#pragma once

#include <vector>

namespace ndelie {

/// Tabulated function with derivatives on sorted nodes. With three or more
/// stored orders each order k is a quintic Hermite interpolant of
/// (f^(k), f^(k+1), f^(k+2)), the top two orders being derivatives of the
/// interpolant based two orders down. With two stored orders the value is cubic
/// Hermite and the derivative its slope.
class NumericFunction {
public:
    NumericFunction() = default;
    /// values[i][k] = f^(k)(nodes[i]); every row has the same length >= 2.
    NumericFunction(std::vector<double> nodes, std::vector<std::vector<double>> values);

    double operator()(double t, int order) const;
    int max_order() const { return stored_ - 1; }
    double lo() const { return nodes_.front(); }
    double hi() const { return nodes_.back(); }
    bool covers(double t) const;
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<std::vector<double>>& values() const { return values_; }

private:
    std::vector<double> nodes_;
    std::vector<std::vector<double>> values_;
    int stored_ = 0;
};

/// Cubic Hermite value and derivatives on [0, h] at offset s.
struct Hermite3 {
    static double value(double y0, double d0, double y1, double d1, double h, double s);
    static double slope(double y0, double d0, double y1, double d1, double h, double s);
    static double curvature(double y0, double d0, double y1, double d1, double h, double s);
};

/// Quintic Hermite from (y, y', y'') at both ends of [0, h].
struct Hermite5 {
    static void eval(const double a[3], const double b[3], double h, double s, double out[3]);
};

}  // namespace ndelie
