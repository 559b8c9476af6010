#include "refcond/simulation.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace refcond {

int SimConfig::steps() const {
    require(t_final > 0.0, "SimConfig: T_final must be positive");
    const double ratio = t_final / sys.sample_time();
    const double rounded = std::round(ratio);
    require(std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, ratio), "SimConfig: T_final / Ts must be integral");
    return static_cast<int>(rounded);
}

SimResult simulate_closed_loop(const SimConfig& config, const StepObserver& observer) {
    const int steps = config.steps();
    const double ts = config.sys.sample_time();
    const int nx = config.sys.nx();
    require(config.signal.dimension() == config.sys.nr(), "simulate_closed_loop: signal dimension must equal nr");
    require(config.x0.size() == 0 || config.x0.size() == nx, "simulate_closed_loop: x0 has wrong size");

    const ReferenceSignal reference =
        config.hold_reference_after_end ? config.signal.sampled(ts, steps) : config.signal;

    MpcController controller(config.sys, config.weights, config.horizon, config.kind, config.input_bounds,
                             config.state_constraints);

    SimResult result;
    result.times.reserve(steps + 1);
    result.states.reserve(steps + 1);
    Vector x = config.x0.size() == 0 ? Vector::Zero(nx) : config.x0;

    for (int k = 0; k <= steps; ++k) {
        PreviewInput preview{reference.at(k * ts), preview_window(reference, k, config.horizon, ts)};
        ControlAction action;
        try {
            action = controller.control_action(x, preview);
        } catch (const QpInfeasibleError&) {
            std::ostringstream msg;
            msg << "QP infeasible at step " << k << " (t = " << k * ts << ", x = " << x.transpose() << ")";
            throw QpInfeasibleError(msg.str(), k);
        }
        result.times.push_back(k * ts);
        result.states.push_back(x);
        result.controls.push_back(action.u0);
        result.references.push_back(preview.current);
        if (action.setpoint.size() > 0) result.setpoints.push_back(action.setpoint);
        result.qp_iterations += action.qp.iterations;
        result.qp_max_iterations = std::max(result.qp_max_iterations, action.qp.iterations);
        result.worst_kkt_residual = std::max(result.worst_kkt_residual, action.qp.kkt_residual);

        if (k == steps) break;
        if (observer) observer(k, x, preview, action.u0);
        x = config.sys.step(x, action.u0);
    }
    result.ise = ise(result, config.sys.c(), ts);
    return result;
}

double ise(const Matrix& c, std::span<const Vector> states, std::span<const Vector> references, double sample_time) {
    require(states.size() == references.size(), "ise: states and references must have equal length");
    double sum = 0.0;
    for (std::size_t k = 0; k < states.size(); ++k) {
        sum += (c * states[k] - references[k]).squaredNorm();
    }
    return sample_time * sum;
}

double ise(const SimResult& result, const Matrix& c, double sample_time) {
    const auto k = static_cast<std::size_t>(std::max(0, result.steps()));
    require(result.states.size() > k && result.references.size() > k, "ise: result is incomplete");
    return ise(c, std::span<const Vector>(result.states.data(), k), std::span<const Vector>(result.references.data(), k),
               sample_time);
}

void export_trajectories(const SimResult& result, const std::filesystem::path& path) {
    require(!result.states.empty(), "export_trajectories: empty result");
    const auto nx = result.states.front().size();
    const auto nu = result.controls.front().size();
    const auto nr = result.references.front().size();

    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_trajectories: cannot open " + path.string());
    out << "t";
    for (Eigen::Index i = 1; i <= nx; ++i) out << " x" << i;
    for (Eigen::Index i = 1; i <= nu; ++i) out << " u" << i;
    for (Eigen::Index i = 1; i <= nr; ++i) out << " r" << i;
    out << '\n';
    out << std::setprecision(17);
    for (std::size_t k = 0; k < result.times.size(); ++k) {
        out << result.times[k];
        for (Eigen::Index i = 0; i < nx; ++i) out << ' ' << result.states[k](i);
        for (Eigen::Index i = 0; i < nu; ++i) out << ' ' << result.controls[k](i);
        for (Eigen::Index i = 0; i < nr; ++i) out << ' ' << result.references[k](i);
        out << '\n';
    }
    if (!out) throw std::runtime_error("export_trajectories: write failed for " + path.string());
}

TrajectoryTable read_trajectories(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_trajectories: cannot open " + path.string());
    TrajectoryTable table;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_trajectories: missing header");
    std::istringstream header(line);
    for (std::string col; header >> col;) table.columns.push_back(col);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row_stream(line);
        std::vector<double> row;
        for (std::string token; row_stream >> token;) row.push_back(std::stod(token));
        if (row.size() != table.columns.size()) {
            throw std::runtime_error("read_trajectories: row width does not match header");
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace refcond
