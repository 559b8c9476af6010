#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "refcond/config.hpp"

namespace refcond {

enum class StudySelector { step_sinusoid, horizon, weighted, custom };

StudySelector parse_study_selector(const std::string& name);
std::string to_string(StudySelector selector);

/// One table cell: `row` x `column` (column empty for single-column metrics).
struct StudyMetric {
    std::string row;
    std::string column;
    std::string metric;
    double value = 0.0;

    std::string config_id() const { return column.empty() ? row : row + "/" + column; }
};

struct StudyReport {
    std::string study;
    std::uint64_t seed = 0;
    std::vector<StudyMetric> metrics;
    std::vector<std::pair<std::string, std::string>> provenance;

    std::optional<double> find(const std::string& row, const std::string& column, const std::string& metric) const;
    double at(const std::string& row, const std::string& column, const std::string& metric) const;
};

struct StudyOptions {
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> config;  // required for the custom selector
    int weighted_trajectories = 40;
};

/// Double integrator p'' = u discretised with zero-order hold, tracking position.
LtiSystem double_integrator(double sample_time = 0.1);

/// Q = R = 1 for the double integrator.
TrackingWeights unit_weights();

/// The four controllers compared in every study, weighted condensation with the given rho.
std::vector<ControllerKind> compared_controllers(std::optional<double> rho = 1e6);

/// Short column label for a controller kind ("no_preview", "average_ref", "ref_cond", "preview").
std::string column_label(const ControllerKind& kind);

StudyReport run_table_studies(StudySelector selector, const StudyOptions& options);

StudyReport step_sinusoid_study();
StudyReport horizon_study();
StudyReport weighted_study(std::uint64_t seed, int trajectories = 40);
StudyReport custom_study(const ProblemConfig& config);

/// Aligned text table, one row per config row, one column per controller or metric.
void write_report_table(const StudyReport& report, std::ostream& out);

/// Machine-readable lines "study config_id metric value seed".
void write_report_metrics(const StudyReport& report, std::ostream& out);

/// Writes <study>_table.txt and <study>_metrics.txt into `dir`.
void write_report(const StudyReport& report, const std::filesystem::path& dir);

} // namespace refcond
