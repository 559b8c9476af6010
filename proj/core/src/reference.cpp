#include "refcond/reference.hpp"

#include <algorithm>
#include <cmath>

namespace refcond {

namespace {

// Sample instants are computed as j * Ts, so comparisons against event times
// allow a few ulps of slack: t = 50 * 0.1 counts as "t >= 5".
bool reached(double t, double event) {
    return t >= event - 1e-9 * std::max(1.0, std::abs(event));
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

int validate(const ReferenceSignal::Kind& kind) {
    return std::visit(
        overloaded{
            [](const ReferenceSignal::Constant& s) {
                require(s.value.size() > 0, "constant reference: empty value");
                return static_cast<int>(s.value.size());
            },
            [](const ReferenceSignal::Step& s) {
                require(s.before.size() > 0 && s.before.size() == s.after.size(),
                        "step reference: before/after must have equal non-zero size");
                require(std::isfinite(s.t_step), "step reference: step time must be finite");
                return static_cast<int>(s.before.size());
            },
            [](const ReferenceSignal::Sinusoid& s) {
                require(s.amplitude.size() > 0, "sinusoid reference: empty amplitude");
                require(std::isfinite(s.angular_frequency), "sinusoid reference: frequency must be finite");
                return static_cast<int>(s.amplitude.size());
            },
            [](const ReferenceSignal::SquareWave& s) {
                require(s.amplitude.size() > 0, "square-wave reference: empty amplitude");
                require(std::is_sorted(s.switch_times.begin(), s.switch_times.end()),
                        "square-wave reference: switch times must be sorted");
                return static_cast<int>(s.amplitude.size());
            },
            [](const ReferenceSignal::PiecewiseConstant& s) {
                require(!s.levels.empty() && s.levels.size() == s.dwell_times.size(),
                        "piecewise-constant reference: need one dwell time per level");
                for (const auto& l : s.levels) {
                    require(l.size() == s.levels.front().size() && l.size() > 0,
                            "piecewise-constant reference: levels must share a dimension");
                }
                for (double d : s.dwell_times) require(d > 0.0, "piecewise-constant reference: dwell times must be positive");
                return static_cast<int>(s.levels.front().size());
            },
            [](const ReferenceSignal::Tabulated& s) {
                require(!s.samples.empty() && s.sample_time > 0.0,
                        "tabulated reference: need samples and a positive sample time");
                for (const auto& v : s.samples) {
                    require(v.size() == s.samples.front().size() && v.size() > 0,
                            "tabulated reference: samples must share a dimension");
                }
                return static_cast<int>(s.samples.front().size());
            },
        },
        kind);
}

} // namespace

ReferenceSignal::ReferenceSignal(Kind kind) : kind_(std::move(kind)) { dim_ = validate(kind_); }

ReferenceSignal ReferenceSignal::constant(Vector value) { return ReferenceSignal(Constant{std::move(value)}); }

ReferenceSignal ReferenceSignal::step(double t_step, Vector before, Vector after) {
    return ReferenceSignal(Step{t_step, std::move(before), std::move(after)});
}

ReferenceSignal ReferenceSignal::sinusoid(Vector amplitude, double angular_frequency) {
    return ReferenceSignal(Sinusoid{std::move(amplitude), angular_frequency});
}

ReferenceSignal ReferenceSignal::square_wave(Vector amplitude, std::vector<double> switch_times) {
    return ReferenceSignal(SquareWave{std::move(amplitude), std::move(switch_times)});
}

ReferenceSignal ReferenceSignal::piecewise_constant(std::vector<Vector> levels, std::vector<double> dwell_times) {
    return ReferenceSignal(PiecewiseConstant{std::move(levels), std::move(dwell_times)});
}

ReferenceSignal ReferenceSignal::tabulated(std::vector<Vector> samples, double sample_time) {
    return ReferenceSignal(Tabulated{std::move(samples), sample_time});
}

Vector ReferenceSignal::at(double t) const {
    return std::visit(
        overloaded{
            [](const Constant& s) -> Vector { return s.value; },
            [t](const Step& s) -> Vector { return reached(t, s.t_step) ? s.after : s.before; },
            [t](const Sinusoid& s) -> Vector { return s.amplitude * std::sin(s.angular_frequency * t); },
            [t](const SquareWave& s) -> Vector {
                std::size_t switches = 0;
                for (double ts : s.switch_times) switches += reached(t, ts) ? 1 : 0;
                return switches % 2 == 1 ? Vector(s.amplitude) : Vector(Vector::Zero(s.amplitude.size()));
            },
            [t](const PiecewiseConstant& s) -> Vector {
                double end = 0.0;
                for (std::size_t i = 0; i + 1 < s.levels.size(); ++i) {
                    end += s.dwell_times[i];
                    if (!reached(t, end)) return s.levels[i];
                }
                return s.levels.back();
            },
            [t](const Tabulated& s) -> Vector {
                const double pos = std::floor(t / s.sample_time + 1e-9);
                const auto last = static_cast<double>(s.samples.size() - 1);
                const auto idx = static_cast<std::size_t>(std::clamp(pos, 0.0, last));
                return s.samples[idx];
            },
        },
        kind_);
}

std::string ReferenceSignal::kind_name() const {
    static const char* names[] = {"constant", "step", "sinusoid", "square_wave", "piecewise_constant", "tabulated"};
    return names[kind_.index()];
}

ReferenceSignal ReferenceSignal::sampled(double sample_time, int count) const {
    require(sample_time > 0.0 && count > 0, "sampled: need a positive sample time and count");
    std::vector<Vector> samples;
    samples.reserve(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) samples.push_back(at(j * sample_time));
    return tabulated(std::move(samples), sample_time);
}

Vector preview_window(const ReferenceSignal& signal, int k, int horizon, double sample_time) {
    require(k >= 0 && horizon >= 1 && sample_time > 0.0, "preview_window: invalid arguments");
    const int nr = signal.dimension();
    Vector window(static_cast<Eigen::Index>(horizon) * nr);
    for (int j = 1; j <= horizon; ++j) {
        window.segment((j - 1) * nr, nr) = signal.at((k + j) * sample_time);
    }
    return window;
}

ReferenceSignal random_piecewise_constant(int dimension, double duration, std::mt19937_64& rng) {
    require(dimension >= 1 && duration > 0.0, "random_piecewise_constant: invalid arguments");
    std::uniform_real_distribution<double> level_dist(-1.5, 1.5);
    std::uniform_real_distribution<double> dwell_dist(1.0, 3.0);
    std::vector<Vector> levels;
    std::vector<double> dwells;
    double covered = 0.0;
    while (covered < duration) {
        Vector level(dimension);
        for (int i = 0; i < dimension; ++i) level(i) = std::clamp(level_dist(rng), -1.0, 1.0);
        const double dwell = dwell_dist(rng);
        levels.push_back(std::move(level));
        dwells.push_back(dwell);
        covered += dwell;
    }
    return ReferenceSignal::piecewise_constant(std::move(levels), std::move(dwells));
}

} // namespace refcond
