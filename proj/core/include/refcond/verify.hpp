#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace refcond {

enum class FaultInjection {
    none,
    /// Perturbs S(0,0) before the row-sum check; used to prove the check can fail.
    corrupt_row_sum,
};

struct PropertyCheck {
    std::string name;
    bool passed = false;
    double worst = 0.0;      // largest observed violation measure
    double tolerance = 0.0;
    std::string detail;
};

struct VerifyOptions {
    std::uint64_t seed = 0;
    FaultInjection fault = FaultInjection::none;
    int random_cases = 100;
};

/// Randomised checks of the structural properties of the gains, maps and QP solver.
std::vector<PropertyCheck> run_property_suite(const VerifyOptions& options = {});

bool all_passed(const std::vector<PropertyCheck>& checks);

/// One line per check: "PASS|FAIL name worst=... tol=... detail".
void write_property_report(const std::vector<PropertyCheck>& checks, std::ostream& out);

} // namespace refcond
