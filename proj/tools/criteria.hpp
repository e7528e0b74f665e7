#pragma once

#include <string>
#include <vector>

namespace suscept::criteria {

// One acceptance criterion: a self-contained scenario with hard-coded
// tolerances, runnable on its own. The detail string lists every measured
// quantity against its required bound.
struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

// "exact": closed-form and identity checks (1, 2, 7, 8, 9, 12).
// "oracle": independent-computation cross-validations (3, 4, 5, 6, 10, 11).
// "all": everything.
std::vector<int> criteria_for_tag(const std::string& tag);

// Runs one criterion by id (1..12). Unknown ids throw ConfigError. Numeric
// exceptions escaping a scenario are caught and reported as a failure.
CriterionResult run_criterion(int id);

std::string criterion_name(int id);

} // namespace suscept::criteria
