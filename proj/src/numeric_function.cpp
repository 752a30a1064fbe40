#include "ndelie/numeric_function.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "ndelie/eval.hpp"

namespace ndelie {

double Hermite3::value(double y0, double d0, double y1, double d1, double h, double s) {
    double u = s / h;
    double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * h * d0 + (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * h * d1;
}

double Hermite3::slope(double y0, double d0, double y1, double d1, double h, double s) {
    double u = s / h;
    double u2 = u * u;
    return ((6 * u2 - 6 * u) * y0 + (-6 * u2 + 6 * u) * y1) / h + (3 * u2 - 4 * u + 1) * d0 + (3 * u2 - 2 * u) * d1;
}

double Hermite3::curvature(double y0, double d0, double y1, double d1, double h, double s) {
    double u = s / h;
    return ((12 * u - 6) * (y0 - y1) / h + (6 * u - 4) * d0 + (6 * u - 2) * d1) / h;
}

void Hermite5::eval(const double a[3], const double b[3], double h, double s, double out[3]) {
    double u = s / h;
    double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
    // basis on [0,1] and its first two derivatives
    double H0 = 1 - 10 * u3 + 15 * u4 - 6 * u5;
    double H1 = u - 6 * u3 + 8 * u4 - 3 * u5;
    double H2 = 0.5 * (u2 - 3 * u3 + 3 * u4 - u5);
    double H3 = 10 * u3 - 15 * u4 + 6 * u5;
    double H4 = -4 * u3 + 7 * u4 - 3 * u5;
    double H5 = 0.5 * (u3 - 2 * u4 + u5);
    double D0 = -30 * u2 + 60 * u3 - 30 * u4;
    double D1 = 1 - 18 * u2 + 32 * u3 - 15 * u4;
    double D2 = 0.5 * (2 * u - 9 * u2 + 12 * u3 - 5 * u4);
    double D3 = -D0;
    double D4 = -12 * u2 + 28 * u3 - 15 * u4;
    double D5 = 0.5 * (3 * u2 - 8 * u3 + 5 * u4);
    double S0 = -60 * u + 180 * u2 - 120 * u3;
    double S1 = -36 * u + 96 * u2 - 60 * u3;
    double S2 = 0.5 * (2 - 18 * u + 36 * u2 - 20 * u3);
    double S3 = -S0;
    double S4 = -24 * u + 84 * u2 - 60 * u3;
    double S5 = 0.5 * (6 * u - 24 * u2 + 20 * u3);
    double p0 = a[0], p1 = a[1] * h, p2 = a[2] * h * h;
    double q0 = b[0], q1 = b[1] * h, q2 = b[2] * h * h;
    out[0] = H0 * p0 + H1 * p1 + H2 * p2 + H3 * q0 + H4 * q1 + H5 * q2;
    out[1] = (D0 * p0 + D1 * p1 + D2 * p2 + D3 * q0 + D4 * q1 + D5 * q2) / h;
    out[2] = (S0 * p0 + S1 * p1 + S2 * p2 + S3 * q0 + S4 * q1 + S5 * q2) / (h * h);
}

NumericFunction::NumericFunction(std::vector<double> nodes, std::vector<std::vector<double>> values)
    : nodes_(std::move(nodes)), values_(std::move(values)) {
    if (nodes_.size() < 2 || nodes_.size() != values_.size())
        throw std::invalid_argument("numeric function needs at least two nodes with values");
    stored_ = int(values_.front().size());
    if (stored_ < 2) throw std::invalid_argument("numeric function needs value and first derivative");
    for (size_t i = 0; i < nodes_.size(); ++i) {
        if (int(values_[i].size()) != stored_) throw std::invalid_argument("ragged numeric table");
        if (i && !(nodes_[i] > nodes_[i - 1])) throw std::invalid_argument("numeric table nodes must increase");
    }
}

bool NumericFunction::covers(double t) const {
    double eps = 1e-12 * std::max(1.0, std::abs(t));
    return t >= nodes_.front() - eps && t <= nodes_.back() + eps;
}

double NumericFunction::operator()(double t, int order) const {
    if (order < 0 || order >= stored_) throw std::out_of_range("derivative order " + std::to_string(order) + " not tabulated");
    if (!covers(t)) throw DomainError("t=" + std::to_string(t) + " outside tabulated range");
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    size_t i = it == nodes_.begin() ? 0 : size_t(it - nodes_.begin()) - 1;
    if (i + 1 >= nodes_.size()) i = nodes_.size() - 2;
    double h = nodes_[i + 1] - nodes_[i];
    double s = t - nodes_[i];
    const auto& a = values_[i];
    const auto& b = values_[i + 1];
    if (stored_ >= 3) {
        int base = std::min(order, stored_ - 3);
        double out[3];
        Hermite5::eval(&a[size_t(base)], &b[size_t(base)], h, s, out);
        return out[order - base];
    }
    if (order + 1 < stored_) return Hermite3::value(a[order], a[order + 1], b[order], b[order + 1], h, s);
    return Hermite3::slope(a[order - 1], a[order], b[order - 1], b[order], h, s);
}

}  // namespace ndelie
