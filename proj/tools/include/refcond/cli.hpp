#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace refcond::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kNumerical = 2,
    kPropertyFailure = 3,
};

struct GainsArgs {
    std::filesystem::path config;
    std::filesystem::path out;
    std::optional<double> rho;
};

struct SimulateArgs {
    std::filesystem::path config;
    std::filesystem::path out;
    std::optional<double> rho;
    std::optional<std::uint64_t> seed;
};

struct StudyArgs {
    std::string selector;
    std::optional<std::filesystem::path> config;
    std::filesystem::path out;
    std::uint64_t seed = 0;
};

struct VerifyArgs {
    std::uint64_t seed = 0;
    bool corrupt_row_sum = false;
};

// Each command reports progress on `out`, problems on `err`, and returns an ExitCode.
int cmd_gains(const GainsArgs& args, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);
int cmd_study(const StudyArgs& args, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err);

/// Full command line dispatch (argv[0] is the program name).
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

} // namespace refcond::cli
