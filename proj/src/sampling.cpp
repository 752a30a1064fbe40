#include "ndelie/sampling.hpp"

#include <numbers>

namespace ndelie {

namespace {
constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};
}

Halton::Halton(int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < dim; ++i) shift_.push_back(u(rng));
}

std::vector<double> Halton::point(int index) const {
    std::vector<double> p(shift_.size());
    for (size_t d = 0; d < shift_.size(); ++d) {
        int base = kPrimes[d % std::size(kPrimes)];
        double f = 1, r = 0;
        int i = index + 1;
        while (i > 0) {
            f /= base;
            r += f * (i % base);
            i /= base;
        }
        double v = r + shift_[d];
        p[d] = v - std::floor(v);
    }
    return p;
}

double TrigInstance::operator()(double t, int order) const {
    double v = order == 0 ? a0 : 0.0;
    for (size_t i = 0; i < amp.size(); ++i)
        v += amp[i] * std::pow(freq[i], order) * std::sin(freq[i] * t + phase[i] + order * std::numbers::pi / 2);
    return v;
}

TrigInstance TrigInstance::random(std::mt19937_64& rng, double period, bool constant, bool nonvanishing) {
    std::uniform_real_distribution<double> u(-1, 1);
    TrigInstance f;
    f.a0 = u(rng);
    if (nonvanishing) f.a0 = (f.a0 < 0 ? -1 : 1) * (2.0 + std::abs(f.a0));
    if (constant) return f;
    for (int i = 0; i < 2; ++i) {
        f.amp.push_back(0.7 * u(rng));
        f.freq.push_back(period > 0 ? 2 * std::numbers::pi * (i + 1) / period : 0.5 + 1.5 * std::abs(u(rng)));
        f.phase.push_back(3 * u(rng));
    }
    return f;
}

double FieldInstance::operator()(double t, double x, int dt, int dx) const {
    double v = 0;
    for (int k = dx; k < 3; ++k) {
        double fac = 1;
        for (int j = 0; j < dx; ++j) fac *= (k - j);
        v += coef[k](t, dt) * fac * std::pow(x, k - dx);
    }
    return v;
}

FieldInstance FieldInstance::random(std::mt19937_64& rng, double period) {
    FieldInstance f;
    for (auto& c : f.coef) c = TrigInstance::random(rng, period, false, false);
    return f;
}

}  // namespace ndelie
