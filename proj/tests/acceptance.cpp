// Runs every acceptance criterion and prints one verdict line each. This is
// the same battery as `susceptlab verify all`, wired into ctest so a plain
// test run exercises the full pipeline end to end.

#include "criteria.hpp"

#include <cstdio>
#include <vector>

int main() {
    using namespace suscept::criteria;
    const std::vector<int> ids = criteria_for_tag("all");
    int failed = 0;
    for (int id : ids) {
        const CriterionResult res = run_criterion(id);
        if (!res.pass) ++failed;
        std::printf("criterion %2d  %s  %s (%.1f s)\n    %s\n", res.id,
                    res.pass ? "PASS" : "FAIL", res.name.c_str(), res.seconds,
                    res.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", ids.size() - failed, ids.size());
    return failed == 0 ? 0 : 1;
}
