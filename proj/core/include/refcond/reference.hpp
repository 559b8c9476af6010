#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "refcond/types.hpp"

namespace refcond {

/// Vector-valued reference r(t), defined for every t >= 0.
class ReferenceSignal {
public:
    struct Constant {
        Vector value;
    };
    /// `before` for t < t_step, `after` from t_step on.
    struct Step {
        double t_step = 0.0;
        Vector before;
        Vector after;
    };
    /// amplitude * sin(angular_frequency * t), elementwise amplitude.
    struct Sinusoid {
        Vector amplitude;
        double angular_frequency = 0.0;
    };
    /// Starts at zero and toggles between 0 and `amplitude` at each switch time.
    struct SquareWave {
        Vector amplitude;
        std::vector<double> switch_times;
    };
    /// levels[i] is held for dwell_times[i] seconds; the last level is held forever.
    struct PiecewiseConstant {
        std::vector<Vector> levels;
        std::vector<double> dwell_times;
    };
    /// samples[j] is the value at t = j * sample_time, held until the next sample
    /// and beyond the last one.
    struct Tabulated {
        std::vector<Vector> samples;
        double sample_time = 0.0;
    };

    using Kind = std::variant<Constant, Step, Sinusoid, SquareWave, PiecewiseConstant, Tabulated>;

    explicit ReferenceSignal(Kind kind);

    static ReferenceSignal constant(Vector value);
    static ReferenceSignal step(double t_step, Vector before, Vector after);
    static ReferenceSignal sinusoid(Vector amplitude, double angular_frequency);
    static ReferenceSignal square_wave(Vector amplitude, std::vector<double> switch_times);
    static ReferenceSignal piecewise_constant(std::vector<Vector> levels, std::vector<double> dwell_times);
    static ReferenceSignal tabulated(std::vector<Vector> samples, double sample_time);

    Vector at(double t) const;
    int dimension() const { return dim_; }
    std::string kind_name() const;
    const Kind& kind() const { return kind_; }

    /// Samples r(j Ts) for j = 0..count-1 into a hold-last tabulated signal.
    ReferenceSignal sampled(double sample_time, int count) const;

private:
    Kind kind_;
    int dim_ = 0;
};

/// (r(t_{k+1}), ..., r(t_{k+N})) stacked, with t_j = j * Ts.
Vector preview_window(const ReferenceSignal& signal, int k, int horizon, double sample_time);

/// Random piecewise-constant reference: each level uniform on [-1.5, 1.5] clipped to
/// [-1, 1] per coordinate, each dwell uniform on [1, 3] s, covering at least `duration`.
ReferenceSignal random_piecewise_constant(int dimension, double duration, std::mt19937_64& rng);

} // namespace refcond
