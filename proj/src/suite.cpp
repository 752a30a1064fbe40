#include "ndelie/suite.hpp"

#include <cmath>

namespace ndelie {

namespace {

SuiteInstance make(std::string id, std::optional<CaseId> expected, const std::string& r,
                   std::initializer_list<std::pair<char, const char*>> coeffs, std::string theta, std::string note) {
    SuiteInstance in;
    in.id = id;
    in.expected = expected;
    in.spec.name = std::move(id);
    in.spec.r = Delay::parse(r);
    for (const auto& [slot, text] : coeffs) in.spec.slot(slot) = CoeffDescriptor::closed(std::string(text));
    in.spec.t0 = 0;
    in.spec.t_end = 3 * in.spec.r.value();
    in.theta = std::move(theta);
    in.note = std::move(note);
    return in;
}

std::vector<SuiteInstance> build() {
    std::vector<SuiteInstance> v;
    v.push_back(make("C1", CaseId::C1, "1", {{'k', "t"}}, "cos(t)", "k nonconstant"));
    v.push_back(make("C2", CaseId::C2, "1", {{'b', "1"}, {'c', "1"}, {'d', "1"}, {'k', "1"}}, "cos(t)", ""));
    v.push_back(make("C3", CaseId::C3, "1", {{'b', "1"}, {'c', "1"}, {'k', "2"}}, "cos(t)", "k = 2 keeps it apart from the k = 1 case"));
    v.push_back(make("C4", CaseId::C4, "1", {{'b', "1"}, {'c', "1"}, {'k', "1"}}, "cos(t)", ""));
    v.push_back(make("C5", CaseId::C5, "1", {{'c', "1+1/2*cos(2*pi*t)"}, {'d', "1+1/2*cos(2*pi*t)"}, {'k', "1"}}, "cos(t)",
                     "periodic d; c = d/k is compatible with every omega"));
    v.push_back(make("C6", CaseId::C6, "1", {{'c', "1"}, {'d', "exp(t)"}, {'k', "1"}}, "cos(t)",
                     "d not r-periodic: no omega survives omega(t) = omega(t-r)"));
    v.push_back(make("C7", CaseId::C7, "2*pi", {{'c', "sin(t)"}, {'d', "sin(t)"}, {'k', "1"}}, "cos(t)",
                     "r = 2*pi so that d is r-periodic"));
    v.push_back(make("C8", CaseId::C8, "1", {{'c', "1"}, {'d', "t^2"}, {'k', "1"}}, "cos(t)",
                     "d not r-periodic: no omega survives omega(t) = omega(t-r)"));
    v.push_back(make("C9", CaseId::C9, "pi", {{'c', "1"}, {'d', "1"}, {'k', "1"}}, "cos(t)",
                     "r = pi so that sin(2t), cos(2t) are r-periodic"));
    v.push_back(make("C10", CaseId::C10, "1", {{'b', "1"}, {'c', "1"}, {'d', "1"}}, "cos(t)", ""));
    v.push_back(make("C11", CaseId::C11, "1", {{'b', "1"}, {'c', "1"}}, "cos(t)", ""));
    v.push_back(make("C12", CaseId::C12, "1", {{'c', "1"}, {'d', "1"}}, "cos(t)", ""));
    v.push_back(make("Ex1", CaseId::C9, "pi", {{'k', "1"}}, "sin(t)", "x'' + x''(t-pi) = 0, solution sin(t)"));
    v.push_back(make("Ex2", CaseId::C12, "1", {{'c', "-1"}, {'d', "1"}}, "1", "x'' - x + x(t-r) = 0"));
    return v;
}

}  // namespace

const std::vector<SuiteInstance>& paper_suite() {
    static const std::vector<SuiteInstance> v = build();
    return v;
}

const SuiteInstance* find_instance(const std::string& id) {
    for (const auto& in : paper_suite())
        if (in.id == id) return &in;
    return nullptr;
}

}  // namespace ndelie
