#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "refcond/controllers.hpp"
#include "refcond/reference.hpp"

namespace refcond {

struct SimConfig {
    LtiSystem sys;
    TrackingWeights weights;
    int horizon = 1;
    double t_final = 0.0;
    Vector x0;  // empty means zero
    ControllerKind kind = ControllerKind::full_preview();
    ReferenceSignal signal;
    InputBounds input_bounds;
    std::optional<StatePolyhedron> state_constraints;
    /// Tabulate the reference on t_0..t_{K-1} and hold the last sample for preview
    /// windows that extend past the simulated horizon. When false the signal is
    /// evaluated directly at every preview instant.
    bool hold_reference_after_end = true;

    /// Number of closed-loop steps K = T_final / Ts; throws if not integral.
    int steps() const;
};

struct SimResult {
    std::vector<double> times;        // t_0 .. t_K
    std::vector<Vector> states;       // x_0 .. x_K
    std::vector<Vector> controls;     // u_0 .. u_K; u_K is computed but not applied
    std::vector<Vector> references;   // reference sample r_k seen by the controller
    std::vector<Vector> setpoints;    // constant setpoint per step (empty for full preview)
    double ise = 0.0;
    long long qp_iterations = 0;
    int qp_max_iterations = 0;
    double worst_kkt_residual = 0.0;

    int steps() const { return static_cast<int>(times.size()) - 1; }
};

/// Called once per step with the step index, the plant state, the preview data and the
/// applied control. Used to evaluate other control laws along the same trajectory.
using StepObserver = std::function<void(int k, const Vector& x, const PreviewInput& preview, const Vector& u)>;

/// Receding-horizon loop for k = 0..K-1: window, control_action, plant update.
/// QP failures are rethrown as QpInfeasibleError carrying the step index.
SimResult simulate_closed_loop(const SimConfig& config, const StepObserver& observer = {});

/// Left-rectangle ISE: Ts * sum_k ||C x_k - r_k||^2 over the given samples.
double ise(const Matrix& c, std::span<const Vector> states, std::span<const Vector> references, double sample_time);

/// ISE of a result over its K closed-loop steps (samples t_0 .. t_{K-1}).
double ise(const SimResult& result, const Matrix& c, double sample_time);

/// Whitespace-delimited table with header "t x1.. u1.. r1..", one row per sample, 17 digits.
void export_trajectories(const SimResult& result, const std::filesystem::path& path);

struct TrajectoryTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

TrajectoryTable read_trajectories(const std::filesystem::path& path);

} // namespace refcond
