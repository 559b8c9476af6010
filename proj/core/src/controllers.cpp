#include "refcond/controllers.hpp"

#include <cmath>
#include <sstream>

namespace refcond {

ControllerKind ControllerKind::reference_condensation(double rho) {
    if (!(std::isfinite(rho) && rho > 0.0)) throw DimensionError("ControllerKind: rho must be positive");
    return ControllerKind(Type::reference_condensation, rho);
}

std::string ControllerKind::name() const {
    switch (type_) {
    case Type::no_preview: return "no_preview";
    case Type::average_reference: return "average_ref";
    case Type::reference_condensation: {
        if (!rho_) return "ref_cond";
        std::ostringstream os;
        os << "ref_cond(rho=" << *rho_ << ")";
        return os.str();
    }
    case Type::full_preview: return "full_preview";
    }
    return "unknown";
}

int parameter_dimension(const ControllerKind& kind, int nx, int nr, int horizon) {
    require(nx > 0 && nr > 0 && horizon > 0, "parameter_dimension: positive dimensions required");
    if (kind.type() == ControllerKind::Type::full_preview) return nx + horizon * nr;
    return nx + nr;
}

MpcController::MpcController(LtiSystem sys,
                             TrackingWeights weights,
                             int horizon,
                             ControllerKind kind,
                             InputBounds input_bounds,
                             std::optional<StatePolyhedron> state_constraints,
                             QpSettings qp_settings)
    : sys_(std::move(sys)),
      weights_(std::move(weights)),
      horizon_(horizon),
      kind_(std::move(kind)),
      input_bounds_(std::move(input_bounds)),
      state_constraints_(std::move(state_constraints)),
      qp_settings_(std::move(qp_settings)),
      ops_(build_batch_operators(sys_, weights_, horizon_)),
      gains_(tracking_gains(ops_)) {
    require(input_bounds_.lower.size() == sys_.nu() && input_bounds_.upper.size() == sys_.nu(),
            "MpcController: input bounds must have nu entries");
    if (kind_.type() == ControllerKind::Type::reference_condensation) {
        map_ = kind_.rho() ? weighted_map(gains_, *kind_.rho()) : unweighted_map(gains_);
    }
}

int MpcController::parameter_dimension() const {
    return refcond::parameter_dimension(kind_, sys_.nx(), sys_.nr(), horizon_);
}

Vector MpcController::qp_reference(const PreviewInput& preview, Vector* setpoint) const {
    const int nr = sys_.nr();
    require(preview.window.size() == static_cast<Eigen::Index>(horizon_) * nr,
            "MpcController: preview window has wrong length");
    require(preview.current.size() == nr, "MpcController: current reference has wrong size");

    Vector constant;
    switch (kind_.type()) {
    case ControllerKind::Type::no_preview: constant = preview.current; break;
    case ControllerKind::Type::average_reference: constant = average_reference(preview.window, nr); break;
    case ControllerKind::Type::reference_condensation: constant = condense(*map_, preview.window); break;
    case ControllerKind::Type::full_preview:
        if (setpoint) setpoint->resize(0);
        return preview.window;
    }
    if (setpoint) *setpoint = constant;
    return constant.replicate(horizon_, 1);
}

DenseQp MpcController::build_qp(const Vector& x, const PreviewInput& preview) const {
    return build_mpc_qp(ops_, x, qp_reference(preview), input_bounds_, state_constraints_);
}

ControlAction MpcController::control_action(const Vector& x, const PreviewInput& preview) {
    ControlAction action;
    const Vector reference = qp_reference(preview, &action.setpoint);
    const DenseQp qp = build_mpc_qp(ops_, x, reference, input_bounds_, state_constraints_);

    QpSettings settings = qp_settings_;
    settings.warm_start = warm_start_;
    action.qp = solve(qp, settings);
    if (action.qp.status == QpStatus::infeasible) {
        warm_start_.reset();
        throw QpInfeasibleError("MPC QP is infeasible");
    }
    if (action.qp.status != QpStatus::optimal) {
        warm_start_.reset();
        throw NumericalError("MPC QP did not converge (" + to_string(action.qp.status) + ")");
    }
    warm_start_ = action.qp.active_set;
    action.u0 = action.qp.z.head(sys_.nu());
    return action;
}

FirstStepFeedback unconstrained_feedback(const TrackingGains& gains) {
    require(gains.fx.rows() >= gains.nu && gains.nu > 0, "unconstrained_feedback: gains are not initialised");
    return {gains.fx.topRows(gains.nu), gains.fr.topRows(gains.nu)};
}

} // namespace refcond
