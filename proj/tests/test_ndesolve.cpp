#include <doctest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ndelie/ndesolve.hpp"
#include "ndelie/numeric_function.hpp"
#include "ndelie/suite.hpp"

using namespace ndelie;

namespace {

constexpr double kPi = std::numbers::pi;

NdeSpec make(const std::string& r, std::initializer_list<std::pair<char, const char*>> coeffs) {
    NdeSpec s;
    s.r = Delay::parse(r);
    for (const auto& [slot, text] : coeffs) s.slot(slot) = CoeffDescriptor::closed(std::string(text));
    return s;
}

double max_error_sin(const Trajectory& tr) {
    double e = 0;
    for (double t = tr.t0; t <= tr.T; t += 0.001) e = std::max(e, std::abs(tr(t, 0) - std::sin(t)));
    return e;
}

}  // namespace

TEST_CASE("Ex1 reproduces sin t") {
    const NdeSpec& s = find_instance("Ex1")->spec;
    auto start = std::chrono::steady_clock::now();
    auto tr = integrate(s, InitialFunction::parse("sin(t)"), 3 * kPi, 64);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(max_error_sin(tr) < 1e-6);
    CHECK(secs < 1.0);
    CHECK(residual(tr, s, interior_samples(tr)) < 1e-5);
}

TEST_CASE("order four on Ex1 and on an ordinary oscillator") {
    const NdeSpec& ex1 = find_instance("Ex1")->spec;
    NdeSpec osc = make("1", {{'c', "1"}});
    for (const NdeSpec* s : std::vector<const NdeSpec*>{&ex1, &osc}) {
        double T = s == &ex1 ? 3 * kPi : 4;
        std::vector<double> err;
        for (int N : {32, 64, 128, 256}) err.push_back(max_error_sin(integrate(*s, InitialFunction::parse("sin(t)"), T, N)));
        for (size_t i = 0; i + 1 < err.size(); ++i) {
            double ratio = err[i] / err[i + 1];
            INFO("ratio " << ratio);
            CHECK(ratio >= 12);
            CHECK(ratio <= 20);
        }
    }
}

TEST_CASE("constants solve Ex2") {
    const NdeSpec& s = find_instance("Ex2")->spec;
    auto tr = integrate(s, InitialFunction::parse("5"), 4, 32);
    for (double t = 0; t <= 4; t += 0.01) CHECK(std::abs(tr(t, 0) - 5) < 1e-10);
    CHECK(residual(tr, s, interior_samples(tr)) < 1e-12);
}

TEST_CASE("history queries return theta exactly") {
    const NdeSpec& s = find_instance("C2")->spec;
    auto th = InitialFunction::parse("cos(3*t)+t^2");
    auto tr = integrate(s, th, 3, 32);
    for (double t = -1; t <= 0; t += 0.01) {
        CHECK(tr(t, 0) == th(t, 0));
        CHECK(tr(t, 1) == th(t, 1));
        CHECK(tr(t, 2) == th(t, 2));
    }
}

TEST_CASE("x'' keeps both one-sided limits at breakpoints") {
    // x'' + x''(t-1) = 0, theta = t^2: x''(0-) = 2, x''(0+) = -2, x''(1+) = 2
    NdeSpec s = make("1", {{'k', "1"}});
    auto tr = integrate(s, InitialFunction::parse("t^2"), 3, 16);
    CHECK(tr.node_a_left(0) == doctest::Approx(2));
    CHECK(tr.node_a_right(0) == doctest::Approx(-2));
    CHECK(tr.node_a_left(16) == doctest::Approx(-2));
    CHECK(tr.node_a_right(16) == doctest::Approx(2));
    CHECK(tr(0.5, 2) == doctest::Approx(-2));
    CHECK(tr(1.5, 2) == doctest::Approx(2));
    // x'(0) = 0 and x'' = -2 on the first interval
    CHECK(tr(0.5, 1) == doctest::Approx(-1));
}

TEST_CASE("linear superposition over random suite equations and histories") {
    std::mt19937_64 rng(7);
    const char* pool[] = {"sin(t)", "cos(2*t)", "1+t", "t^2-1", "exp(t/2)", "3", "sin(t)*t"};
    std::vector<std::string> ids = {"C1", "C2", "C3", "C4", "C5", "C9", "C10", "C11", "C12", "Ex1", "Ex2"};
    for (int trial = 0; trial < 40; ++trial) {
        const auto* in = find_instance(ids[rng() % ids.size()]);
        std::string a = pool[rng() % 7], b = pool[rng() % 7];
        INFO(in->id << " " << a << " + " << b);
        double T = *in->spec.t_end;
        auto ta = integrate(in->spec, InitialFunction::parse(a), T, 32);
        auto tb = integrate(in->spec, InitialFunction::parse(b), T, 32);
        auto tab = integrate(in->spec, InitialFunction::parse("(" + a + ")+(" + b + ")"), T, 32);
        for (int j = 0; j <= 100; ++j) {
            double t = in->spec.t0 - in->spec.r.value() + (T - in->spec.t0 + in->spec.r.value()) * j / 100.0;
            for (int o = 0; o < 3; ++o) {
                double sum = ta(t, o) + tb(t, o), whole = tab(t, o);
                CHECK(std::abs(sum - whole) < 1e-8 * std::max(1.0, std::abs(whole)));
            }
        }
    }
}

TEST_CASE("residual bound scales with h^4") {
    for (const char* id : {"Ex1", "C2", "C4", "C10", "C12"}) {
        const auto* in = find_instance(id);
        auto tr = integrate(in->spec, InitialFunction::parse(in->theta), *in->spec.t_end, 64);
        double scale = 0;
        for (size_t i = 0; i < tr.nodes(); ++i) scale = std::max(scale, std::abs(tr.node_a_right(i)) + std::abs(tr.node_x(i)));
        INFO(id);
        CHECK(residual(tr, in->spec, interior_samples(tr)) < 100 * std::pow(tr.h, 4) * std::max(1.0, scale));
    }
}

TEST_CASE("residual catches a corrupted trajectory") {
    const NdeSpec& s = find_instance("Ex1")->spec;
    auto tr = integrate(s, InitialFunction::parse("sin(t)"), 3 * kPi, 64);
    CHECK(residual(tr.with_scaled_solution(1.01), s, interior_samples(tr)) > 1e-3);
    CHECK_THROWS_AS(residual(tr, s, {-1.0}), DomainError);
}

TEST_CASE("integrate rejects bad input") {
    const NdeSpec& s = find_instance("Ex1")->spec;
    auto th = InitialFunction::parse("sin(t)");
    CHECK_THROWS_AS(integrate(s, th, 3 * kPi, 8), SolveError);
    CHECK_THROWS_AS(integrate(s, th, 2.5 * kPi, 64), SolveError);
    CHECK_THROWS_AS(integrate(s, th, -kPi, 64), SolveError);
    NdeSpec sym = s;
    sym.r.symbolic = true;
    CHECK_THROWS_AS(integrate(sym, th, 3 * kPi, 64), SolveError);
    CHECK_THROWS_AS(InitialFunction::parse("x+t"), SolveError);
}

TEST_CASE("homogeneous slot") {
    auto ex1 = solve_homogeneous_slot(find_instance("Ex1")->spec, InitialFunction::parse("sin(t)"), 3 * kPi, 64);
    CHECK(ex1.tag == "rho");
    CHECK(max_error_sin(ex1) < 1e-6);
    auto ex2 = solve_homogeneous_slot(find_instance("Ex2")->spec, InitialFunction::parse("1"), 3, 32);
    for (double t = 0; t <= 3; t += 0.1) CHECK(ex2(t, 0) == doctest::Approx(1).epsilon(1e-12));
    auto zero = solve_homogeneous_slot(find_instance("C5")->spec, InitialFunction::parse("0"), 3, 32);
    for (double t = 0; t <= 3; t += 0.1) CHECK(zero(t, 0) == 0);
    NdeSpec inhom = make("1", {{'k', "1"}, {'h', "1"}});
    CHECK_THROWS_AS(solve_homogeneous_slot(inhom, InitialFunction::parse("0"), 3, 32), SolveError);
    auto fn = ex1.binding("rho");
    CHECK(fn.coeffs.at("rho")(1.0, 2) == doctest::Approx(-std::sin(1.0)).epsilon(1e-5));
}

TEST_CASE("numeric coefficient tables integrate like their closed forms") {
    NdeSpec closed = make("1", {{'c', "1"}, {'d', "2+cos(t)"}, {'k', "1/2"}});
    NdeSpec tab = closed;
    std::vector<double> nodes;
    std::vector<std::vector<double>> vals;
    for (int i = 0; i <= 800; ++i) {
        double t = -1 + i * 0.005;
        nodes.push_back(t);
        vals.push_back({2 + std::cos(t), -std::sin(t), -std::cos(t), std::sin(t)});
    }
    tab.d = CoeffDescriptor::numeric(std::make_shared<NumericFunction>(nodes, vals));
    auto a = integrate(closed, InitialFunction::parse("sin(t)"), 3, 64);
    auto b = integrate(tab, InitialFunction::parse("sin(t)"), 3, 64);
    for (double t = 0; t <= 3; t += 0.05) CHECK(std::abs(a(t, 0) - b(t, 0)) < 1e-10);
}

TEST_CASE("csv export") {
    auto tr = integrate(find_instance("Ex1")->spec, InitialFunction::parse("sin(t)"), 3 * kPi, 16);
    std::ostringstream os;
    tr.write_csv(os, 2);
    std::string text = os.str();
    CHECK(text.rfind("t,x,xprime,xsecond\n", 0) == 0);
    size_t rows = size_t(std::count(text.begin(), text.end(), '\n')) - 1;
    CHECK(rows == size_t(16 * 2 + 1 + 48 * 2));
}
