#include "refcond/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "refcond/condensation.hpp"
#include "refcond/config.hpp"
#include "refcond/matrix_io.hpp"
#include "refcond/studies.hpp"
#include "refcond/verify.hpp"

namespace refcond::cli {

namespace {

template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const QpInfeasibleError& e) {
        err << "error: " << e.what();
        if (e.step() >= 0) err << " (step " << e.step() << ")";
        err << '\n';
        return kNumerical;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DimensionError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    }
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::filesystem::filesystem_error("cannot write", path, std::make_error_code(std::errc::io_error));
    out << std::setprecision(17);
    return out;
}

// Diagonal of S Ibar: each entry is the sum of the weights one output places on itself.
Vector row_sums(const CondensationMap& map, int nr, int horizon) {
    return (map.s * stacked_identity(nr, horizon)).diagonal();
}

void write_row(std::ostream& out, const std::string& key, const Vector& v) {
    out << key;
    for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << v(i);
    out << '\n';
}

ControllerKind with_rho(const ControllerKind& kind, const std::optional<double>& rho) {
    if (rho && kind.type() == ControllerKind::Type::reference_condensation) {
        return ControllerKind::reference_condensation(*rho);
    }
    return kind;
}

} // namespace

int cmd_gains(const GainsArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ProblemConfig cfg = load_config(args.config);
        const BatchOperators ops = build_batch_operators(cfg.system, cfg.weights, cfg.horizon);
        const TrackingGains gains = tracking_gains(ops);
        const CondensationMap s = unweighted_map(gains);
        const double rho = args.rho.value_or(cfg.rho.value_or(1e6));

        std::filesystem::create_directories(args.out);
        write_matrix(args.out / "Fx.txt", gains.fx);
        write_matrix(args.out / "Fr.txt", gains.fr);
        write_matrix(args.out / "S.txt", s.s);

        std::optional<CondensationMap> s_w;
        if (s.rank_ok) {
            s_w = weighted_map(gains, rho);
            write_matrix(args.out / "S_W.txt", s_w->s);
        }

        std::ofstream summary = open_output(args.out / "summary.txt");
        summary << "config " << cfg.name << '\n'
                << "nx " << gains.nx << '\n'
                << "nu " << gains.nu << '\n'
                << "nr " << gains.nr << '\n'
                << "horizon " << gains.horizon << '\n'
                << "Fx_shape " << gains.fx.rows() << ' ' << gains.fx.cols() << '\n'
                << "Fr_shape " << gains.fr.rows() << ' ' << gains.fr.cols() << '\n'
                << "S_shape " << s.s.rows() << ' ' << s.s.cols() << '\n'
                << "sigma_max_Fr " << gains.fr_norm << '\n'
                << "rank_ok " << (s.rank_ok ? "true" : "false") << '\n'
                << "closed_loop_spectral_radius " << spectral_radius(closed_loop_matrix(cfg.system, gains)) << '\n';
        write_row(summary, "S_row_sums", row_sums(s, gains.nr, gains.horizon));
        summary << "rho " << rho << '\n';
        if (s_w) write_row(summary, "S_W_row_sums", row_sums(*s_w, gains.nr, gains.horizon));
        if (!s.rank_ok) {
            summary << "warning rank_deficient\n";
            err << "warning: Fr Ibar is rank deficient (is Q zero?); S set to zero and S_W not written\n";
        }

        out << "wrote gains for " << cfg.name << " (N=" << gains.horizon << ") to " << args.out.string() << '\n';
        return kOk;
    });
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ProblemConfig cfg = load_config(args.config, args.seed);
        const SimConfig sim = cfg.simulation(with_rho(cfg.controller, args.rho));
        const SimResult res = simulate_closed_loop(sim);

        std::filesystem::create_directories(args.out);
        export_trajectories(res, args.out / "trajectory.txt");
        std::ofstream metrics = open_output(args.out / "metrics.txt");
        metrics << "config " << cfg.name << '\n'
                << "controller " << sim.kind.name() << '\n'
                << "steps " << res.steps() << '\n'
                << "ise " << res.ise << '\n'
                << "qp_iterations " << res.qp_iterations << '\n'
                << "qp_max_iterations " << res.qp_max_iterations << '\n'
                << "worst_kkt_residual " << res.worst_kkt_residual << '\n'
                << "seed " << cfg.seed << '\n';

        out << sim.kind.name() << " ise " << std::setprecision(6) << res.ise << '\n';
        return kOk;
    });
}

int cmd_study(const StudyArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const StudySelector selector = parse_study_selector(args.selector);
        StudyOptions options;
        options.seed = args.seed;
        options.config = args.config;
        const StudyReport report = run_table_studies(selector, options);
        write_report(report, args.out);
        write_report_table(report, out);
        return kOk;
    });
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        VerifyOptions options;
        options.seed = args.seed;
        options.fault = args.corrupt_row_sum ? FaultInjection::corrupt_row_sum : FaultInjection::none;
        const auto checks = run_property_suite(options);
        write_property_report(checks, out);
        if (all_passed(checks)) return kOk;
        err << "failed:";
        for (const auto& c : checks) {
            if (!c.passed) err << ' ' << c.name;
        }
        err << '\n';
        return kPropertyFailure;
    });
}

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Reference condensation for preview MPC: gains, simulations, studies and checks"};
    app.require_subcommand(1);

    GainsArgs gains;
    auto* gains_cmd = app.add_subcommand("gains", "Write Fx, Fr, S and S_W for a config");
    gains_cmd->add_option("--config", gains.config, "Problem config (YAML)")->required();
    gains_cmd->add_option("--out", gains.out, "Output directory")->required();
    gains_cmd->add_option("--rho", gains.rho, "First-block weight for S_W");

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Run one closed-loop simulation");
    sim_cmd->add_option("--config", sim.config, "Problem config (YAML)")->required();
    sim_cmd->add_option("--out", sim.out, "Output directory")->required();
    sim_cmd->add_option("--rho", sim.rho, "Override rho of a ref_cond controller");
    sim_cmd->add_option("--seed", sim.seed, "Seed for random reference signals");

    StudyArgs study;
    std::string positional_selector;
    auto* study_cmd = app.add_subcommand("study", "Reproduce a study table");
    study_cmd->add_option("name", positional_selector, "step_sinusoid | horizon | weighted | custom");
    study_cmd->add_option("--selector", study.selector, "Same as the positional selector");
    study_cmd->add_option("--config", study.config, "Config for the custom selector");
    study_cmd->add_option("--out", study.out, "Output directory")->required();
    study_cmd->add_option("--seed", study.seed, "Seed for random references");

    VerifyArgs verify;
    auto* verify_cmd = app.add_subcommand("verify", "Run the property suite");
    verify_cmd->add_option("--seed", verify.seed, "Seed for random instances");
    verify_cmd->add_flag("--corrupt-row-sum", verify.corrupt_row_sum)->group("");

    std::vector<const char*> raw;
    raw.reserve(argv.size());
    for (const auto& a : argv) raw.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(raw.size()), raw.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    if (*gains_cmd) return cmd_gains(gains, out, err);
    if (*sim_cmd) return cmd_simulate(sim, out, err);
    if (*study_cmd) {
        if (study.selector.empty()) study.selector = positional_selector;
        if (study.selector.empty()) {
            err << "error: study needs a selector\n";
            return kUsage;
        }
        return cmd_study(study, out, err);
    }
    return cmd_verify(verify, out, err);
}

} // namespace refcond::cli
