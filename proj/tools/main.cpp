// Command-line front end: fit cloud dynamics, solve the control problem,
// validate the scheme against the square-root-diffusion benchmark, and run
// Monte Carlo simulations under the extracted policy.
//
// Exit codes: 0 success, 1 input error, 2 fit non-convergence,
//             3 stability refusal, 4 solver blow-up, 5 validation failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pvrisk/pvrisk.hpp"

namespace fs = std::filesystem;
using namespace pvrisk;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::string slices_override;
    long long seed_override = -1;
    bool allow_unstable = false;
};

RunConfig load_config(const CommonArgs& args) {
    RunConfig cfg = args.config_path.empty() ? RunConfig{} : RunConfig::load(args.config_path);
    if (args.seed_override >= 0) cfg.sim.seed = static_cast<std::uint64_t>(args.seed_override);
    if (!args.slices_override.empty()) cfg.slices = args.slices_override;
    return cfg;
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw validation_error("cannot create output directory '" + dir + "': " + ec.message());
}

void write_echo(const RunConfig& cfg, const std::string& out_dir) {
    std::ofstream os(fs::path(out_dir) / "resolved_config.ini");
    if (!os) throw validation_error("cannot write resolved_config.ini in '" + out_dir + "'");
    cfg.echo(os);
}

std::ofstream open_out(const std::string& out_dir, const std::string& name) {
    std::ofstream os(fs::path(out_dir) / name);
    if (!os) throw validation_error("cannot write '" + name + "' in '" + out_dir + "'");
    return os;
}

std::string slice_file_name(double t) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "fields_t%.6g.csv", t);
    return buf;
}

SolutionFields solve_with_refusal(const RunConfig& cfg, const ProblemSpec& problem,
                                  bool allow_unstable) {
    const Grid grid = cfg.make_grid();
    const SchemeOptions scheme = cfg.make_scheme();
    const double bound = monotone_dt_bound(problem, grid);
    if (grid.dt() > bound && !allow_unstable)
        throw stability_error("dt = " + format_full(grid.dt()) + " exceeds the monotone bound " +
                              format_full(bound) +
                              " for this grid; refusing to run (pass --allow-unstable to force)");
    return solve_hjb(problem, grid, scheme);
}

int cmd_solve(const CommonArgs& args) {
    const RunConfig cfg = load_config(args);
    const ProblemSpec problem = cfg.make_problem();
    const SolutionFields fields = solve_with_refusal(cfg, problem, args.allow_unstable);

    ensure_out_dir(args.out_dir);
    write_echo(cfg, args.out_dir);

    {
        auto os = open_out(args.out_dir, "summary.csv");
        os << "name,value\n";
        os << "psi_min," << format_sig9(fields.psi_min()) << "\n";
        os << "psi_max," << format_sig9(fields.psi_max()) << "\n";
        os << "dt," << format_sig9(fields.grid.dt()) << "\n";
        os << "dt_bound," << format_sig9(monotone_dt_bound(problem, fields.grid)) << "\n";
        for (const auto& p : cfg.probe_points()) {
            os << "psi(t=" << format_sig9(p[0]) << ";x=" << format_sig9(p[1])
               << ";y=" << format_sig9(p[2]) << ")," << format_sig9(fields.psi_at(p[0], p[1], p[2]))
               << "\n";
            os << "u_star(t=" << format_sig9(p[0]) << ";x=" << format_sig9(p[1])
               << ";y=" << format_sig9(p[2]) << ")," << format_sig9(fields.u_at(p[0], p[1], p[2]))
               << "\n";
        }
    }
    for (double t : cfg.slice_times()) {
        const std::size_t s = fields.nearest_slice(t);
        auto os = open_out(args.out_dir, slice_file_name(t));
        fields.write_slice_csv(os, s);
    }
    if (cfg.dump_fields) {
        write_fields_dump_file((fs::path(args.out_dir) / "fields.bin").string(), fields);
    }
    std::cout << "solve: psi in [" << format_sig9(fields.psi_min()) << ", "
              << format_sig9(fields.psi_max()) << "], " << fields.slice_count()
              << " slices stored\n";
    return 0;
}

int cmd_fit(const CommonArgs& args) {
    const RunConfig cfg = load_config(args);
    if (cfg.fit_data.empty())
        throw validation_error("fit: config key fit.data (cloud series CSV) is required");
    const CloudSeries series = ingest_cloud_series_file(cfg.fit_data);
    const FitReport rep = fit_transition_lsq(series, cfg.fit_init, cfg.make_fit_options());

    ensure_out_dir(args.out_dir);
    write_echo(cfg, args.out_dir);
    {
        auto os = open_out(args.out_dir, "fit_report.csv");
        os << "param,value,init,residual\n";
        os << "r," << format_full(rep.params.r) << ',' << format_full(cfg.fit_init.r) << ','
           << format_full(rep.residual) << "\n";
        os << "a," << format_full(rep.params.a) << ',' << format_full(cfg.fit_init.a) << ','
           << format_full(rep.residual) << "\n";
        os << "sigma," << format_full(rep.params.sigma) << ',' << format_full(cfg.fit_init.sigma)
           << ',' << format_full(rep.residual) << "\n";
    }
    std::cout << "fit: r = " << format_sig9(rep.params.r) << ", a = " << format_sig9(rep.params.a)
              << ", sigma = " << format_sig9(rep.params.sigma) << ", residual = "
              << format_sig9(rep.residual) << ", iterations = " << rep.iterations
              << (rep.converged ? "" : (rep.at_bound ? " [at parameter bound]" : " [not converged]"))
              << "\n";
    return rep.converged ? 0 : 2;
}

int cmd_validate_cir(const CommonArgs& args) {
    const RunConfig cfg = load_config(args);
    validate(cfg.cir);
    if (!(cfg.cir_dt_factor > 0.0 && cfg.cir_dt_factor <= 1.0))
        throw validation_error("cir.dt_factor must lie in (0, 1]");
    const double bound = cir_monotone_dt_bound(cfg.cir, cfg.cir_x_max, cfg.cir_nx);
    const long nt = std::max<long>(1, static_cast<long>(
                                          std::ceil(cfg.cir.horizon / (bound * cfg.cir_dt_factor))));
    const CirSolution sol = solve_cir_numeric(cfg.cir, cfg.cir_x_max, cfg.cir_nx, nt);

    ensure_out_dir(args.out_dir);
    write_echo(cfg, args.out_dir);
    double max_rel = 0.0;
    {
        auto os = open_out(args.out_dir, "cir_validation.csv");
        os << "x,numeric,exact,rel_error\n";
        for (int j = 0; j <= cfg.cir_nx; ++j) {
            const double x = sol.x(j);
            const double num = sol.psi[0][j];
            const double exact = cir_exact_value(cfg.cir, 0.0, x);
            const double rel = std::abs(num - exact) / std::abs(exact);
            os << format_sig9(x) << ',' << format_sig9(num) << ',' << format_sig9(exact) << ','
               << format_sig9(rel) << "\n";
            if (x >= 0.5 && x <= 2.0) max_rel = std::max(max_rel, rel);
        }
    }
    std::cout << "validate-cir: nt = " << nt << ", max relative error on [0.5, 2] = "
              << format_sig9(max_rel) << "\n";
    return max_rel < 0.01 ? 0 : 5;
}

int cmd_simulate(const CommonArgs& args) {
    const RunConfig cfg = load_config(args);
    const ProblemSpec problem = cfg.make_problem();

    const bool needs_fields = cfg.sim.policy == SimConfig::Policy::u_star ||
                              cfg.sim.distortion == SimConfig::Distortion::phi_star;
    SolutionFields fields;
    const SolutionFields* fields_ptr = nullptr;
    if (!cfg.sim_fields.empty()) {
        fields = read_fields_dump_file(cfg.sim_fields);
        if (fields.grid.capacity != problem.battery.capacity)
            throw validation_error("simulate: fields dump capacity does not match the config");
        if (fields.grid.t_start != problem.t_start)
            throw validation_error("simulate: fields dump t_start does not match the config");
        fields_ptr = &fields;
    } else if (needs_fields) {
        fields = solve_with_refusal(cfg, problem, args.allow_unstable);
        fields_ptr = &fields;
    }

    const PathBundle bundle = simulate_paths(problem, fields_ptr, cfg.horizon, cfg.sim);
    const ObjectiveEstimate est = estimate_objective(bundle);
    const double pde = fields_ptr != nullptr
                           ? fields_ptr->psi_at(problem.t_start, cfg.sim.x0, cfg.sim.y0)
                           : std::nan("");
    const double ratio = pde != 0.0 ? est.mean / pde : std::nan("");

    ensure_out_dir(args.out_dir);
    write_echo(cfg, args.out_dir);
    {
        auto os = open_out(args.out_dir, "mc_report.csv");
        os << "mean,std_error,pde_value,ratio\n";
        os << format_full(est.mean) << ',' << format_full(est.std_error) << ','
           << format_full(pde) << ',' << format_full(ratio) << "\n";
    }
    if (cfg.sim.record_paths) {
        auto os = open_out(args.out_dir, "paths.csv");
        write_paths_csv(os, bundle);
    }
    std::cout << "simulate: mean = " << format_sig9(est.mean) << " +/- "
              << format_sig9(est.std_error) << " (" << cfg.sim.n_paths << " paths, "
              << bundle.n_steps << " steps)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust risk-sensitive dispatch toolkit for a PV-battery system"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "INI config file (defaults used if omitted)");
        sub->add_option("--out", args.out_dir, "output directory (default '.')");
        sub->add_option("--seed", args.seed_override, "override [sim] seed");
        sub->add_option("--slices", args.slices_override,
                        "override [output] slices (comma-separated times)");
        sub->add_flag("--allow-unstable", args.allow_unstable,
                      "run even if dt violates the monotone bound");
    };

    CLI::App* s_fit = app.add_subcommand("fit", "fit cloud-cover dynamics to a daily series");
    CLI::App* s_solve = app.add_subcommand("solve", "solve the storage control problem");
    CLI::App* s_cir = app.add_subcommand("validate-cir",
                                         "check the scheme against the closed-form benchmark");
    CLI::App* s_sim = app.add_subcommand("simulate", "Monte Carlo under the solved policy");
    for (CLI::App* s : {s_fit, s_solve, s_cir, s_sim}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (s_fit->parsed()) return cmd_fit(args);
        if (s_solve->parsed()) return cmd_solve(args);
        if (s_cir->parsed()) return cmd_validate_cir(args);
        if (s_sim->parsed()) return cmd_simulate(args);
        return 1;
    } catch (const stability_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const blowup_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
