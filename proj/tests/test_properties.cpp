#include <gtest/gtest.h>

#include <sstream>

#include "refcond/verify.hpp"

using namespace refcond;

class PropertySuite : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(PropertySuite, AllChecksPass) {
    VerifyOptions opts;
    opts.seed = GetParam();
    for (const auto& c : run_property_suite(opts)) {
        EXPECT_TRUE(c.passed) << c.name << " worst=" << c.worst << " tol=" << c.tolerance << " (" << c.detail << ")";
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, PropertySuite, ::testing::Values(0u, 1u, 2u, 17u, 12345u));

TEST(PropertySuiteFaults, CorruptedRowSumDetected) {
    VerifyOptions opts;
    opts.fault = FaultInjection::corrupt_row_sum;
    const auto checks = run_property_suite(opts);
    EXPECT_FALSE(all_passed(checks));
    for (const auto& c : checks) {
        if (c.name == "condensation_row_sums") {
            EXPECT_FALSE(c.passed);
        }
    }
}

TEST(PropertySuiteFaults, Deterministic) {
    std::ostringstream a, b;
    write_property_report(run_property_suite({}), a);
    write_property_report(run_property_suite({}), b);
    EXPECT_EQ(a.str(), b.str());
}
