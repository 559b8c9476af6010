#include "refcond/studies.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

namespace refcond {

namespace {

constexpr double kSampleTime = 0.1;
// Long enough for the N = 5 controller to settle; the step row is unaffected.
constexpr double kTableDuration = 20.0;
constexpr double kRandomDuration = 15.0;
constexpr double kCustomDefaultDuration = 30.0;

std::string format_number(double v, int precision = 17) {
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

SimConfig double_integrator_config(int horizon, ControllerKind kind, ReferenceSignal signal, double t_final) {
    return SimConfig{
        .sys = double_integrator(kSampleTime),
        .weights = unit_weights(),
        .horizon = horizon,
        .t_final = t_final,
        .x0 = Vector::Zero(2),
        .kind = std::move(kind),
        .signal = std::move(signal),
        .input_bounds = InputBounds::symmetric(1, 1.0),
        .state_constraints = std::nullopt,
    };
}

ReferenceSignal unit_step() { return ReferenceSignal::step(5.0, Vector::Zero(1), Vector::Ones(1)); }

ReferenceSignal slow_sinusoid() { return ReferenceSignal::sinusoid(Vector::Ones(1), 0.5); }

void add_common_provenance(StudyReport& report) {
    report.provenance.emplace_back("seed", std::to_string(report.seed));
    report.provenance.emplace_back("tol_kkt", "1e-08");
    report.provenance.emplace_back("ise", "left-rectangle over t_0..t_{K-1}");
    report.provenance.emplace_back("preview_beyond_end", "hold last in-horizon sample");
}

} // namespace

StudySelector parse_study_selector(const std::string& name) {
    if (name == "step_sinusoid") return StudySelector::step_sinusoid;
    if (name == "horizon") return StudySelector::horizon;
    if (name == "weighted") return StudySelector::weighted;
    if (name == "custom") return StudySelector::custom;
    throw DimensionError("unknown study selector '" + name + "' (expected step_sinusoid, horizon, weighted or custom)");
}

std::string to_string(StudySelector selector) {
    switch (selector) {
    case StudySelector::step_sinusoid: return "step_sinusoid";
    case StudySelector::horizon: return "horizon";
    case StudySelector::weighted: return "weighted";
    case StudySelector::custom: return "custom";
    }
    return "unknown";
}

std::optional<double> StudyReport::find(const std::string& row, const std::string& column, const std::string& metric) const {
    for (const auto& m : metrics) {
        if (m.row == row && m.column == column && m.metric == metric) return m.value;
    }
    return std::nullopt;
}

double StudyReport::at(const std::string& row, const std::string& column, const std::string& metric) const {
    if (auto v = find(row, column, metric)) return *v;
    throw std::out_of_range("StudyReport: no metric " + row + "/" + column + ":" + metric);
}

LtiSystem double_integrator(double sample_time) {
    Matrix a(2, 2);
    a << 1.0, sample_time, 0.0, 1.0;
    Matrix b(2, 1);
    b << 0.5 * sample_time * sample_time, sample_time;
    Matrix c(1, 2);
    c << 1.0, 0.0;
    return LtiSystem(a, b, c, sample_time);
}

TrackingWeights unit_weights() { return TrackingWeights(Matrix::Identity(1, 1), Matrix::Identity(1, 1)); }

std::vector<ControllerKind> compared_controllers(std::optional<double> rho) {
    return {ControllerKind::no_preview(), ControllerKind::average_reference(),
            rho ? ControllerKind::reference_condensation(*rho) : ControllerKind::reference_condensation(),
            ControllerKind::full_preview()};
}

std::string column_label(const ControllerKind& kind) {
    switch (kind.type()) {
    case ControllerKind::Type::no_preview: return "no_preview";
    case ControllerKind::Type::average_reference: return "average_ref";
    case ControllerKind::Type::reference_condensation: return "ref_cond";
    case ControllerKind::Type::full_preview: return "preview";
    }
    return "unknown";
}

StudyReport step_sinusoid_study() {
    StudyReport report;
    report.study = "step_sinusoid";
    const std::pair<std::string, ReferenceSignal> signals[] = {{"step", unit_step()}, {"sinusoid", slow_sinusoid()}};
    for (const auto& [row, signal] : signals) {
        for (const auto& kind : compared_controllers()) {
            const SimResult res = simulate_closed_loop(double_integrator_config(50, kind, signal, kTableDuration));
            report.metrics.push_back({row, column_label(kind), "ise", res.ise});
        }
    }
    add_common_provenance(report);
    report.provenance.emplace_back("horizon", "50");
    report.provenance.emplace_back("T_final", format_number(kTableDuration));
    report.provenance.emplace_back("rho", "1e+06");
    return report;
}

StudyReport horizon_study() {
    StudyReport report;
    report.study = "horizon";
    for (int n : {5, 10, 20, 50, 75, 100}) {
        for (const auto& kind : compared_controllers()) {
            const SimResult res = simulate_closed_loop(double_integrator_config(n, kind, unit_step(), kTableDuration));
            report.metrics.push_back({"N=" + std::to_string(n), column_label(kind), "ise", res.ise});
        }
    }
    add_common_provenance(report);
    report.provenance.emplace_back("T_final", format_number(kTableDuration));
    report.provenance.emplace_back("rho", "1e+06");
    return report;
}

StudyReport weighted_study(std::uint64_t seed, int trajectories) {
    require(trajectories > 0, "weighted_study: need at least one trajectory");
    constexpr int kHorizon = 30;
    const double rhos[] = {1.0, 1e2, 1e6};
    const char* rows[] = {"rho=1", "rho=1e2", "rho=1e6"};

    std::mt19937_64 rng(seed);
    double ratio_sum[3] = {0.0, 0.0, 0.0};
    double mismatch_sum[3] = {0.0, 0.0, 0.0};
    long long mismatch_count = 0;

    for (int j = 0; j < trajectories; ++j) {
        const ReferenceSignal signal = random_piecewise_constant(1, kRandomDuration, rng);

        std::vector<MpcController> shadows;
        for (double rho : rhos) {
            shadows.emplace_back(double_integrator(kSampleTime), unit_weights(), kHorizon,
                                 ControllerKind::reference_condensation(rho), InputBounds::symmetric(1, 1.0));
        }
        const StepObserver observe = [&](int, const Vector& x, const PreviewInput& preview, const Vector& u) {
            for (std::size_t i = 0; i < shadows.size(); ++i) {
                mismatch_sum[i] += (shadows[i].control_action(x, preview).u0 - u).cwiseAbs().maxCoeff();
            }
            ++mismatch_count;
        };
        const SimResult preview = simulate_closed_loop(
            double_integrator_config(kHorizon, ControllerKind::full_preview(), signal, kRandomDuration), observe);

        for (std::size_t i = 0; i < 3; ++i) {
            const SimResult cond = simulate_closed_loop(double_integrator_config(
                kHorizon, ControllerKind::reference_condensation(rhos[i]), signal, kRandomDuration));
            ratio_sum[i] += cond.ise / preview.ise;
        }
    }

    StudyReport report;
    report.study = "weighted";
    report.seed = seed;
    for (std::size_t i = 0; i < 3; ++i) {
        report.metrics.push_back({rows[i], "", "mean_ise_ratio", ratio_sum[i] / trajectories});
        report.metrics.push_back(
            {rows[i], "", "mean_first_control_mismatch", mismatch_sum[i] / static_cast<double>(mismatch_count)});
    }
    add_common_provenance(report);
    report.provenance.emplace_back("trajectories", std::to_string(trajectories));
    report.provenance.emplace_back("horizon", std::to_string(kHorizon));
    report.provenance.emplace_back("T_final", format_number(kRandomDuration));
    report.provenance.emplace_back("levels", "uniform[-1.5,1.5] clipped to [-1,1]; dwell uniform[1,3] s");
    return report;
}

StudyReport custom_study(const ProblemConfig& config) {
    StudyReport report;
    report.study = "custom";
    report.seed = config.seed;
    ProblemConfig cfg = config;
    if (!cfg.t_final) cfg.t_final = kCustomDefaultDuration;
    for (const auto& kind : compared_controllers(cfg.rho)) {
        const SimResult res = simulate_closed_loop(cfg.simulation(kind));
        report.metrics.push_back({cfg.name, column_label(kind), "ise", res.ise});
    }
    add_common_provenance(report);
    report.provenance.emplace_back("config", cfg.name);
    report.provenance.emplace_back("horizon", std::to_string(cfg.horizon));
    report.provenance.emplace_back("T_final", format_number(*cfg.t_final));
    return report;
}

StudyReport run_table_studies(StudySelector selector, const StudyOptions& options) {
    StudyReport report;
    switch (selector) {
    case StudySelector::step_sinusoid: report = step_sinusoid_study(); break;
    case StudySelector::horizon: report = horizon_study(); break;
    case StudySelector::weighted: report = weighted_study(options.seed, options.weighted_trajectories); break;
    case StudySelector::custom:
        if (!options.config) throw ConfigError("custom study requires a config path");
        report = custom_study(load_config(*options.config));
        break;
    }
    if (selector != StudySelector::custom) report.seed = options.seed;
    for (auto& [key, value] : report.provenance) {
        if (key == "seed") value = std::to_string(report.seed);
    }
    return report;
}

void write_report_table(const StudyReport& report, std::ostream& out) {
    std::vector<std::string> rows;
    std::vector<std::string> columns;
    std::map<std::pair<std::string, std::string>, double> cells;
    for (const auto& m : report.metrics) {
        const std::string col = m.column.empty() ? m.metric : m.column;
        if (std::find(rows.begin(), rows.end(), m.row) == rows.end()) rows.push_back(m.row);
        if (std::find(columns.begin(), columns.end(), col) == columns.end()) columns.push_back(col);
        cells[{m.row, col}] = m.value;
    }

    out << "# study: " << report.study << '\n';
    for (const auto& [key, value] : report.provenance) out << "# " << key << ": " << value << '\n';

    std::size_t label_width = 6;
    for (const auto& r : rows) label_width = std::max(label_width, r.size());
    std::vector<std::size_t> widths;
    for (const auto& c : columns) widths.push_back(std::max<std::size_t>(c.size(), 12));

    out << std::left << std::setw(static_cast<int>(label_width)) << "config";
    for (std::size_t j = 0; j < columns.size(); ++j) out << "  " << std::setw(static_cast<int>(widths[j])) << columns[j];
    out << '\n';
    for (const auto& r : rows) {
        out << std::left << std::setw(static_cast<int>(label_width)) << r;
        for (std::size_t j = 0; j < columns.size(); ++j) {
            auto it = cells.find({r, columns[j]});
            const std::string cell = it == cells.end() ? "-" : format_number(it->second, 6);
            out << "  " << std::setw(static_cast<int>(widths[j])) << cell;
        }
        out << '\n';
    }
}

void write_report_metrics(const StudyReport& report, std::ostream& out) {
    for (const auto& m : report.metrics) {
        out << report.study << ' ' << m.config_id() << ' ' << m.metric << ' ' << format_number(m.value) << ' '
            << report.seed << '\n';
    }
}

void write_report(const StudyReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream table(dir / (report.study + "_table.txt"));
        if (!table) throw std::runtime_error("write_report: cannot write to " + dir.string());
        write_report_table(report, table);
    }
    std::ofstream metrics(dir / (report.study + "_metrics.txt"));
    if (!metrics) throw std::runtime_error("write_report: cannot write to " + dir.string());
    write_report_metrics(report, metrics);
}

} // namespace refcond
