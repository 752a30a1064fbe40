#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ndelie/classify.hpp"
#include "ndelie/spec.hpp"

namespace ndelie {

/// One built-in scenario: a concrete equation per case plus the two
/// Ex instances. Free constants are pinned to 1 and r = 1 unless a case needs
/// a period-compatible delay.
struct SuiteInstance {
    std::string id;                  // "C1".."C12", "Ex1", "Ex2"
    std::optional<CaseId> expected;  // case the instance must land in
    NdeSpec spec;
    std::string theta;               // initial function on [t0 - r, t0]
    std::string note;
};

const std::vector<SuiteInstance>& paper_suite();
const SuiteInstance* find_instance(const std::string& id);

}  // namespace ndelie
