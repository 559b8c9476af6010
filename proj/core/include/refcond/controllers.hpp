#pragma once

#include <optional>
#include <string>

#include "refcond/condensation.hpp"
#include "refcond/mpc_qp.hpp"

namespace refcond {

/// Which reference information a controller passes to the MPC problem.
class ControllerKind {
public:
    enum class Type { no_preview, average_reference, reference_condensation, full_preview };

    static ControllerKind no_preview() { return ControllerKind(Type::no_preview, std::nullopt); }
    static ControllerKind average_reference() { return ControllerKind(Type::average_reference, std::nullopt); }
    /// Unweighted condensation S.
    static ControllerKind reference_condensation() { return ControllerKind(Type::reference_condensation, std::nullopt); }
    /// Weighted condensation S_W with first-block scale rho > 0.
    static ControllerKind reference_condensation(double rho);
    static ControllerKind full_preview() { return ControllerKind(Type::full_preview, std::nullopt); }

    Type type() const { return type_; }
    const std::optional<double>& rho() const { return rho_; }
    std::string name() const;

    friend bool operator==(const ControllerKind&, const ControllerKind&) = default;

private:
    ControllerKind(Type type, std::optional<double> rho) : type_(type), rho_(rho) {}

    Type type_;
    std::optional<double> rho_;
};

/// n_x + n_r for setpoint-based kinds, n_x + N n_r for full preview.
int parameter_dimension(const ControllerKind& kind, int nx, int nr, int horizon);

/// Reference data available at step k: r(t_k) and the preview (r(t_{k+1}), ..., r(t_{k+N})).
struct PreviewInput {
    Vector current;
    Vector window;
};

struct ControlAction {
    Vector u0;
    /// Constant setpoint handed to the QP; empty for full preview.
    Vector setpoint;
    QpSolution qp;
};

/// Error raised when the MPC QP has no feasible point.
class QpInfeasibleError : public NumericalError {
public:
    QpInfeasibleError(const std::string& what, int step = -1) : NumericalError(what), step_(step) {}
    int step() const { return step_; }

private:
    int step_;
};

/// Receding-horizon MPC with one of the four reference treatments.
/// Stateful (keeps the last active set for warm starts); use from one thread at a time.
class MpcController {
public:
    MpcController(LtiSystem sys,
                  TrackingWeights weights,
                  int horizon,
                  ControllerKind kind,
                  InputBounds input_bounds,
                  std::optional<StatePolyhedron> state_constraints = std::nullopt,
                  QpSettings qp_settings = {});

    /// Stacked reference passed to the QP for the given preview data.
    Vector qp_reference(const PreviewInput& preview, Vector* setpoint = nullptr) const;

    DenseQp build_qp(const Vector& x, const PreviewInput& preview) const;

    /// Solves the MPC problem and returns the first control. Throws QpInfeasibleError.
    ControlAction control_action(const Vector& x, const PreviewInput& preview);

    void reset_warm_start() { warm_start_.reset(); }

    const LtiSystem& system() const { return sys_; }
    const ControllerKind& kind() const { return kind_; }
    int horizon() const { return horizon_; }
    const BatchOperators& operators() const { return ops_; }
    const TrackingGains& gains() const { return gains_; }
    const std::optional<CondensationMap>& condensation() const { return map_; }
    int parameter_dimension() const;

private:
    LtiSystem sys_;
    TrackingWeights weights_;
    int horizon_;
    ControllerKind kind_;
    InputBounds input_bounds_;
    std::optional<StatePolyhedron> state_constraints_;
    QpSettings qp_settings_;
    BatchOperators ops_;
    TrackingGains gains_;
    std::optional<CondensationMap> map_;
    std::optional<ActiveSet> warm_start_;
};

/// First-step feedback of the unconstrained policy: u_0 = Kx x + Kr r.
struct FirstStepFeedback {
    Matrix kx;  // nu x nx
    Matrix kr;  // nu x N nr
};

FirstStepFeedback unconstrained_feedback(const TrackingGains& gains);

} // namespace refcond
