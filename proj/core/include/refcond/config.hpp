#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "refcond/simulation.hpp"

namespace refcond {

/// Declarative problem description (YAML). Sections:
///
///   system:      A, B, C (nested arrays), Ts, optional `continuous: true` (ZOH-discretised)
///   weights:     Q, R
///   horizon:     N
///   constraints: u_lower, u_upper (or u_max), optional state_matrix / state_rhs
///   signal:      kind + parameters (constant, step, sinusoid, square_wave,
///                piecewise_constant, random_piecewise_constant, tabulated)
///   controller:  kind (no_preview | average_ref | ref_cond | full_preview), rho
///   simulation:  T_final, x0, seed
///
/// Defaults: x0 = 0, rho = 1e6, no constraints, seed = 0, controller ref_cond.
struct ProblemConfig {
    std::string name;
    LtiSystem system;
    TrackingWeights weights;
    int horizon;
    InputBounds input_bounds;
    std::optional<StatePolyhedron> state_constraints;
    std::optional<ReferenceSignal> signal;
    ControllerKind controller;
    /// rho used for weighted maps; nullopt means the unweighted map.
    std::optional<double> rho;
    std::optional<double> t_final;
    Vector x0;
    std::uint64_t seed = 0;

    /// Simulation setup; throws ConfigError when signal or T_final is missing.
    SimConfig simulation(const std::optional<ControllerKind>& kind = std::nullopt) const;
};

/// Parses a YAML document. Errors carry "source:line:column: key: message".
/// `seed_override` replaces simulation.seed (used for random signals).
ProblemConfig parse_config(const std::string& text,
                           const std::string& source = "<config>",
                           std::optional<std::uint64_t> seed_override = std::nullopt);
ProblemConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = std::nullopt);

} // namespace refcond
