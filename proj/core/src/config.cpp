#include "refcond/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace refcond {

namespace {

class Parser {
public:
    explicit Parser(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& node, const std::string& key, const std::string& message) const {
        std::ostringstream os;
        os << source_;
        if (node.IsDefined() && node.Mark().line >= 0) {
            os << ':' << node.Mark().line + 1 << ':' << node.Mark().column + 1;
        }
        os << ": " << key << ": " << message;
        throw ConfigError(os.str());
    }

    YAML::Node section(const YAML::Node& root, const std::string& name, bool required) const {
        const YAML::Node node = root[name];
        if (!node.IsDefined() || node.IsNull()) {
            if (required) fail(root, name, "missing required section");
            return YAML::Node(YAML::NodeType::Undefined);
        }
        if (!node.IsMap()) fail(node, name, "expected a mapping");
        return node;
    }

    double scalar(const YAML::Node& node, const std::string& key) const {
        if (!node.IsScalar()) fail(node, key, "expected a number");
        const std::string text = node.Scalar();
        if (text == "inf" || text == ".inf" || text == "+inf" || text == "+.inf") return std::numeric_limits<double>::infinity();
        if (text == "-inf" || text == "-.inf") return -std::numeric_limits<double>::infinity();
        try {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used != text.size()) fail(node, key, "not a number: '" + text + "'");
            return v;
        } catch (const std::logic_error&) {
            fail(node, key, "not a number: '" + text + "'");
        }
    }

    double number(const YAML::Node& parent, const std::string& key, std::optional<double> fallback = std::nullopt) const {
        const YAML::Node node = parent[key];
        if (!node.IsDefined() || node.IsNull()) {
            if (fallback) return *fallback;
            fail(parent, key, "missing required value");
        }
        return scalar(node, key);
    }

    // Accepts a scalar, a flat list or a nested list.
    Matrix matrix(const YAML::Node& node, const std::string& key) const {
        if (!node.IsDefined() || node.IsNull()) fail(node, key, "missing required matrix");
        if (node.IsScalar()) return Matrix::Constant(1, 1, scalar(node, key));
        if (!node.IsSequence() || node.size() == 0) fail(node, key, "expected a non-empty nested array");
        if (!node[0].IsSequence()) {
            Matrix row(1, static_cast<Eigen::Index>(node.size()));
            for (std::size_t j = 0; j < node.size(); ++j) row(0, static_cast<Eigen::Index>(j)) = scalar(node[j], key);
            return row;
        }
        const std::size_t cols = node[0].size();
        Matrix m(static_cast<Eigen::Index>(node.size()), static_cast<Eigen::Index>(cols));
        for (std::size_t i = 0; i < node.size(); ++i) {
            const YAML::Node row = node[i];
            if (!row.IsSequence() || row.size() != cols) fail(row, key, "matrix rows must all have the same length");
            for (std::size_t j = 0; j < cols; ++j) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = scalar(row[j], key);
            }
        }
        return m;
    }

    Matrix required_matrix(const YAML::Node& parent, const std::string& key) const {
        const YAML::Node node = parent[key];
        if (!node.IsDefined() || node.IsNull()) fail(parent, key, "missing required matrix");
        return matrix(node, key);
    }

    // Scalar or flat list; a scalar is broadcast to `size` entries.
    Vector vector(const YAML::Node& node, const std::string& key, int size) const {
        if (node.IsScalar()) return Vector::Constant(size, scalar(node, key));
        if (!node.IsSequence()) fail(node, key, "expected a number or a list of numbers");
        if (static_cast<int>(node.size()) != size) {
            fail(node, key, "expected " + std::to_string(size) + " entries, got " + std::to_string(node.size()));
        }
        Vector v(size);
        for (int i = 0; i < size; ++i) v(i) = scalar(node[static_cast<std::size_t>(i)], key);
        return v;
    }

    std::vector<double> list(const YAML::Node& parent, const std::string& key) const {
        const YAML::Node node = parent[key];
        if (!node.IsDefined() || !node.IsSequence()) fail(parent, key, "expected a list of numbers");
        std::vector<double> out;
        for (const auto& item : node) out.push_back(scalar(item, key));
        return out;
    }

    std::string text(const YAML::Node& parent, const std::string& key, const std::string& fallback) const {
        const YAML::Node node = parent[key];
        if (!node.IsDefined() || node.IsNull()) return fallback;
        if (!node.IsScalar()) fail(node, key, "expected a string");
        return node.Scalar();
    }

    template <class Fn>
    auto guarded(const YAML::Node& node, const std::string& key, Fn&& fn) const {
        try {
            return fn();
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            fail(node, key, e.what());
        }
    }

    const std::string& source() const { return source_; }

private:
    std::string source_;
};

ReferenceSignal parse_signal(const Parser& p, const YAML::Node& node, int nr, double ts, std::uint64_t seed) {
    const std::string kind = p.text(node, "kind", "");
    auto vec = [&](const std::string& key) {
        const YAML::Node v = node[key];
        if (!v.IsDefined()) p.fail(node, "signal." + key, "missing required value");
        return p.vector(v, "signal." + key, nr);
    };
    return p.guarded(node, "signal", [&]() -> ReferenceSignal {
        if (kind == "constant") return ReferenceSignal::constant(vec("value"));
        if (kind == "step") {
            const Vector before = node["before"].IsDefined() ? vec("before") : Vector(Vector::Zero(nr));
            return ReferenceSignal::step(p.number(node, "t_step"), before, vec("after"));
        }
        if (kind == "sinusoid") {
            return ReferenceSignal::sinusoid(vec("amplitude"), p.number(node, "angular_frequency"));
        }
        if (kind == "square_wave") return ReferenceSignal::square_wave(vec("amplitude"), p.list(node, "switch_times"));
        if (kind == "piecewise_constant") {
            const YAML::Node levels = node["levels"];
            if (!levels.IsSequence()) p.fail(node, "signal.levels", "expected a list of levels");
            std::vector<Vector> values;
            for (const auto& l : levels) values.push_back(p.vector(l, "signal.levels", nr));
            return ReferenceSignal::piecewise_constant(std::move(values), p.list(node, "dwell_times"));
        }
        if (kind == "random_piecewise_constant") {
            std::mt19937_64 rng(seed);
            return random_piecewise_constant(nr, p.number(node, "duration"), rng);
        }
        if (kind == "tabulated") {
            const YAML::Node samples = node["samples"];
            if (!samples.IsSequence()) p.fail(node, "signal.samples", "expected a list of samples");
            std::vector<Vector> values;
            for (const auto& s : samples) values.push_back(p.vector(s, "signal.samples", nr));
            return ReferenceSignal::tabulated(std::move(values), p.number(node, "sample_time", ts));
        }
        p.fail(node, "signal.kind", "unknown signal kind '" + kind + "'");
    });
}

ControllerKind parse_controller(const Parser& p, const YAML::Node& node, std::optional<double>& rho) {
    const std::string kind = node.IsDefined() ? p.text(node, "kind", "ref_cond") : "ref_cond";
    rho = 1e6;
    if (node.IsDefined() && node["rho"].IsDefined()) {
        const YAML::Node r = node["rho"];
        if (r.IsScalar() && r.Scalar() == "unweighted") {
            rho.reset();
        } else {
            rho = p.scalar(r, "controller.rho");
            if (!(*rho > 0.0)) p.fail(r, "controller.rho", "must be positive");
        }
    }
    if (kind == "no_preview") return ControllerKind::no_preview();
    if (kind == "average_ref") return ControllerKind::average_reference();
    if (kind == "full_preview") return ControllerKind::full_preview();
    if (kind == "ref_cond") {
        return rho ? ControllerKind::reference_condensation(*rho) : ControllerKind::reference_condensation();
    }
    p.fail(node, "controller.kind", "unknown controller kind '" + kind + "'");
}

} // namespace

SimConfig ProblemConfig::simulation(const std::optional<ControllerKind>& kind) const {
    if (!signal) throw ConfigError(name + ": signal section is required for simulation");
    if (!t_final) throw ConfigError(name + ": simulation.T_final is required for simulation");
    return SimConfig{
        .sys = system,
        .weights = weights,
        .horizon = horizon,
        .t_final = *t_final,
        .x0 = x0,
        .kind = kind.value_or(controller),
        .signal = *signal,
        .input_bounds = input_bounds,
        .state_constraints = state_constraints,
    };
}

ProblemConfig parse_config(const std::string& text, const std::string& source, std::optional<std::uint64_t> seed_override) {
    Parser p(source);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        std::ostringstream os;
        os << source << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": parse error: " << e.msg;
        throw ConfigError(os.str());
    }
    if (!root.IsMap()) throw ConfigError(source + ": top level must be a mapping");

    const YAML::Node sys_node = p.section(root, "system", true);
    const Matrix a = p.required_matrix(sys_node, "A");
    const Matrix b = p.required_matrix(sys_node, "B");
    const Matrix c = p.required_matrix(sys_node, "C");
    const double ts = p.number(sys_node, "Ts");
    const bool continuous = sys_node["continuous"].IsDefined() && sys_node["continuous"].as<bool>();
    LtiSystem system = p.guarded(sys_node, "system", [&] {
        return continuous ? LtiSystem::from_continuous(a, b, c, ts) : LtiSystem(a, b, c, ts);
    });

    const YAML::Node w_node = p.section(root, "weights", true);
    const Matrix q = p.required_matrix(w_node, "Q");
    const Matrix r = p.required_matrix(w_node, "R");
    TrackingWeights weights = p.guarded(w_node, "weights", [&] { return TrackingWeights(q, r); });
    if (q.rows() != system.nr()) p.fail(w_node, "weights.Q", "must be nr x nr");
    if (r.rows() != system.nu()) p.fail(w_node, "weights.R", "must be nu x nu");

    const YAML::Node n_node = root["horizon"];
    if (!n_node.IsDefined()) p.fail(root, "horizon", "missing required value");
    const double n_value = p.scalar(n_node, "horizon");
    if (n_value < 1 || std::floor(n_value) != n_value) p.fail(n_node, "horizon", "must be a positive integer");

    const YAML::Node sim_node = p.section(root, "simulation", false);
    std::uint64_t seed = 0;
    std::optional<double> t_final;
    Vector x0 = Vector::Zero(system.nx());
    if (sim_node.IsDefined()) {
        if (sim_node["seed"].IsDefined()) seed = static_cast<std::uint64_t>(p.number(sim_node, "seed"));
        if (sim_node["T_final"].IsDefined()) t_final = p.number(sim_node, "T_final");
        if (sim_node["x0"].IsDefined()) x0 = p.vector(sim_node["x0"], "simulation.x0", system.nx());
    }
    if (seed_override) seed = *seed_override;

    InputBounds bounds = InputBounds::unbounded(system.nu());
    std::optional<StatePolyhedron> state_constraints;
    const YAML::Node con = p.section(root, "constraints", false);
    if (con.IsDefined()) {
        if (con["u_max"].IsDefined()) {
            const Vector umax = p.vector(con["u_max"], "constraints.u_max", system.nu());
            bounds = {-umax, umax};
        }
        if (con["u_lower"].IsDefined()) bounds.lower = p.vector(con["u_lower"], "constraints.u_lower", system.nu());
        if (con["u_upper"].IsDefined()) bounds.upper = p.vector(con["u_upper"], "constraints.u_upper", system.nu());
        for (int i = 0; i < system.nu(); ++i) {
            if (bounds.lower(i) > bounds.upper(i)) p.fail(con, "constraints", "u_lower exceeds u_upper");
        }
        if (con["state_matrix"].IsDefined()) {
            StatePolyhedron poly{p.required_matrix(con, "state_matrix"), Vector()};
            if (poly.p_matrix.cols() != system.nx()) p.fail(con["state_matrix"], "constraints.state_matrix", "must have nx columns");
            const YAML::Node rhs = con["state_rhs"];
            if (!rhs.IsDefined()) p.fail(con, "constraints.state_rhs", "required with state_matrix");
            poly.p_vector = p.vector(rhs, "constraints.state_rhs", static_cast<int>(poly.p_matrix.rows()));
            state_constraints = std::move(poly);
        }
    }

    std::optional<double> rho;
    const ControllerKind controller = parse_controller(p, p.section(root, "controller", false), rho);

    std::optional<ReferenceSignal> signal;
    const YAML::Node sig = p.section(root, "signal", false);
    if (sig.IsDefined()) signal = parse_signal(p, sig, system.nr(), ts, seed);

    return ProblemConfig{
        .name = p.text(root, "name", source),
        .system = std::move(system),
        .weights = std::move(weights),
        .horizon = static_cast<int>(n_value),
        .input_bounds = std::move(bounds),
        .state_constraints = std::move(state_constraints),
        .signal = std::move(signal),
        .controller = controller,
        .rho = rho,
        .t_final = t_final,
        .x0 = std::move(x0),
        .seed = seed,
    };
}

ProblemConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.string(), seed_override);
}

} // namespace refcond
