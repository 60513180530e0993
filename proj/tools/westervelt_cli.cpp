// Command-line driver for the Westervelt experiments.
//
//   westervelt run             --config cfg.json [--out dir]
//   westervelt eps-sweep       --config cfg.json [--jobs n] [--check]
//   westervelt h-sweep         --config cfg.json [--jobs n] [--check]
//   westervelt example2        --config cfg.json [--jobs n] [--check]
//   westervelt kernel-check    --config cfg.json [--check]
//   westervelt tabulate-kernel --config cfg.json [--horizon T] [--samples n]
//
// Exit codes: 0 ok, 2 configuration error, 3 solver failure, 4 failed --check.

#include "westervelt/experiments.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace westervelt;

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverError = 3;
constexpr int kCheckFailed = 4;

struct Options {
    std::string config;
    std::string out;
    int jobs = 1;
    double dt = 0.0;
    bool quiet = false;
    bool check = false;
    double horizon = 0.0;
    int samples = 200;
};

ExperimentSpec load(const Options& o, ExperimentKind expected)
{
    ExperimentSpec s = parse_config(o.config);
    if (s.kind != expected) {
        throw ConfigError(std::string("kind: this subcommand expects ") + to_string(expected) + ", config has " +
                          to_string(s.kind));
    }
    if (o.dt > 0.0) {
        json j = to_json(s);
        j["solver"]["dt"] = o.dt;
        s = parse_spec(j);
    }
    if (!o.out.empty()) s.output = o.out;
    return s;
}

std::ofstream open_out(const fs::path& p)
{
    std::ofstream f(p);
    if (!f) throw ConfigError("cannot write " + p.string());
    return f;
}

void write_json(const fs::path& p, const json& j)
{
    auto f = open_out(p);
    f << j.dump(2) << '\n';
}

struct Gate {
    std::string name;
    bool pass;
    std::string detail;
};

int report(const std::vector<Gate>& gates, bool check, bool quiet)
{
    bool ok = true;
    for (const auto& g : gates) {
        ok = ok && g.pass;
        if (!quiet) std::cout << (g.pass ? "PASS " : "FAIL ") << g.name << ": " << g.detail << '\n';
    }
    return check && !ok ? kCheckFailed : 0;
}

std::string fmt(double x)
{
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

std::string eoc_list(const EocTable& t)
{
    std::string s;
    for (std::size_t i = 0; i < t.eoc.size(); ++i) s += (i ? " " : "") + (t.defined[i] ? fmt(t.eoc[i]) : "undefined");
    return s;
}

int cmd_run(const Options& o)
{
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentSpec s = load(o, ExperimentKind::SingleRun);
    const SingleRunResult r = run_single(s);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fs::create_directories(s.output);
    {
        auto f = open_out(fs::path(s.output) / "run.csv");
        write_runs_csv(f, {r.summary});
    }
    {
        auto f = open_out(fs::path(s.output) / "energy.csv");
        write_csv_header(f, "energy");
        f << "t,e0,e1,min_coeff,max_coeff,l2_u,discrete_energy,fp_iterations\n";
        for (const auto& rec : r.trajectory.records) {
            f << rec.t << ',' << rec.energy.e0 << ',' << rec.energy.e1 << ',' << rec.energy.min_coeff << ','
              << rec.energy.max_coeff << ',' << rec.l2_d << ',' << rec.discrete_energy << ',' << rec.fp_iterations
              << '\n';
        }
    }
    if (s.problem == Problem::Example2) {
        for (std::size_t k = 0; k < r.trajectory.snapshots.size(); ++k) {
            auto f = open_out(fs::path(s.output) / ("snapshot_" + std::to_string(k) + ".csv"));
            write_snapshot_csv(f, *r.trajectory.space, r.trajectory.snapshots[k], s.example2.nx);
        }
    }
    json meta = metadata(s, secs);
    meta["result"] = {{"error", std::isfinite(r.summary.error) ? json(r.summary.error) : json(nullptr)},
                      {"qoi", r.summary.qoi},
                      {"max_energy", r.summary.max_energy},
                      {"min_coeff", r.summary.min_coeff},
                      {"max_coeff", r.summary.max_coeff},
                      {"max_fp_iterations", r.summary.max_fp_iterations}};
    write_json(fs::path(s.output) / "metadata.json", meta);
    const bool coeff_ok = r.summary.min_coeff >= 0.5 && r.summary.max_coeff <= 1.5;
    return report({{"non-degeneracy", coeff_ok,
                    "1 + k u in [" + fmt(r.summary.min_coeff) + ", " + fmt(r.summary.max_coeff) + "]"}},
                  o.check, o.quiet);
}

int cmd_eps_sweep(const Options& o)
{
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentSpec s = load(o, ExperimentKind::EpsSweep);
    const EpsSweepResult r = run_eps_sweep(s, o.jobs);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fs::create_directories(s.output);
    {
        auto f = open_out(fs::path(s.output) / "eps_sweep.csv");
        write_eps_sweep_csv(f, r);
    }
    {
        auto f = open_out(fs::path(s.output) / "eoc_e_eps.csv");
        write_csv_header(f, "eoc");
        write_csv(f, r.e_eps);
    }
    json meta = metadata(s, secs);
    meta["result"] = eps_sweep_json(r);
    write_json(fs::path(s.output) / "metadata.json", meta);
    return report({{"e_eps EOC in [0.9, 1.1]", r.e_eps.all_within(0.9, 1.1), eoc_list(r.e_eps)},
                   {"distance slope in [0.9, 1.1]",
                    r.distance_fit.slope >= 0.9 && r.distance_fit.slope <= 1.1, fmt(r.distance_fit.slope)},
                   {"energy spread < 20%", r.energy_spread < 0.2, fmt(r.energy_spread)}},
                  o.check, o.quiet);
}

int cmd_h_sweep(const Options& o)
{
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentSpec s = load(o, ExperimentKind::HSweep);
    const HSweepResult r = run_h_sweep(s, o.jobs);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fs::create_directories(s.output);
    {
        auto f = open_out(fs::path(s.output) / "h_sweep.csv");
        write_h_sweep_csv(f, r);
    }
    json meta = metadata(s, secs);
    meta["result"] = h_sweep_json(r);
    write_json(fs::path(s.output) / "metadata.json", meta);
    return report({{"h EOC in [1.85, 2.05]", r.error.all_within(1.85, 2.05), eoc_list(r.error)},
                   {"initial acceleration EOC >= 1.9", r.accel.all_within(1.9, 1e9), eoc_list(r.accel)}},
                  o.check, o.quiet);
}

int cmd_example2(const Options& o)
{
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentSpec s = load(o, ExperimentKind::Example2Sweep);
    const Example2Result r = run_example2(s, o.jobs);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fs::create_directories(s.output);
    {
        auto f = open_out(fs::path(s.output) / "qoi.csv");
        write_csv_header(f, "qoi");
        f << "eps,qoi\n";
        for (const auto& run : r.runs) f << run.eps << ',' << run.qoi << '\n';
    }
    for (std::size_t i = 0; i < r.snapshots.size(); ++i) {
        for (std::size_t k = 0; k < r.snapshots[i].size(); ++k) {
            auto f = open_out(fs::path(s.output) /
                              ("snapshot_eps" + std::to_string(i) + "_" + std::to_string(k) + ".csv"));
            write_snapshot_csv(f, *r.space, r.snapshots[i][k], s.example2.nx);
        }
    }
    json meta = metadata(s, secs);
    meta["result"] = example2_json(r);
    write_json(fs::path(s.output) / "metadata.json", meta);
    const bool coeff_ok = r.min_coeff >= 0.5 && r.max_coeff <= 1.5;
    return report({{"QoI linear in eps (R^2 >= 0.99)", r.fit.r2 >= 0.99, "R^2 = " + fmt(r.fit.r2)},
                   {"non-degeneracy", coeff_ok, "[" + fmt(r.min_coeff) + ", " + fmt(r.max_coeff) + "]"}},
                  o.check, o.quiet);
}

int cmd_kernel_check(const Options& o)
{
    const ExperimentSpec s = load(o, ExperimentKind::KernelCheck);
    const KernelCheckResult r = run_kernel_check(s);
    fs::create_directories(s.output);
    json meta = metadata(s, 0.0);
    meta["result"] = kernel_check_json(r);
    write_json(fs::path(s.output) / "kernel_check.json", meta);
    return report({{"positivity " + r.kernel.name(), r.positivity.pass,
                    "min eigenvalue " + fmt(r.positivity.min_eigenvalue) + ", ||Q|| " + fmt(r.positivity.norm)}},
                  o.check, o.quiet);
}

int cmd_tabulate(const Options& o)
{
    ExperimentSpec s = parse_config(o.config);
    if (!o.out.empty()) s.output = o.out;
    const double horizon = o.horizon > 0.0 ? o.horizon : s.final_time;
    fs::create_directories(s.output);
    auto f = open_out(fs::path(s.output) / "kernel.csv");
    tabulate_kernel(f, s.kernel, horizon, o.samples);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Westervelt equation with fractional damping: experiments"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output directory (overrides the config)");
        sub->add_option("--dt", o.dt, "time step override")->check(CLI::PositiveNumber);
        sub->add_flag("--quiet", o.quiet, "no console summary");
        sub->add_flag("--check", o.check, "exit with status 4 when a gate fails");
    };
    auto jobs = [&](CLI::App* sub) {
        sub->add_option("--jobs", o.jobs, "parallel simulations; 1 is deterministic in scheduling")
            ->check(CLI::PositiveNumber);
    };

    auto* run = app.add_subcommand("run", "single simulation");
    common(run);
    auto* eps = app.add_subcommand("eps-sweep", "convergence in eps at fixed h");
    common(eps);
    jobs(eps);
    auto* hs = app.add_subcommand("h-sweep", "convergence in h with eps = h^2");
    common(hs);
    jobs(hs);
    auto* ex2 = app.add_subcommand("example2", "boundary-excited 2D sweep over eps");
    common(ex2);
    jobs(ex2);
    auto* kc = app.add_subcommand("kernel-check", "discrete positivity of the memory kernel");
    common(kc);
    auto* tab = app.add_subcommand("tabulate-kernel", "CSV of t, K(t), int_0^t K");
    common(tab);
    tab->add_option("--horizon", o.horizon, "largest t (default: final time)")->check(CLI::PositiveNumber);
    tab->add_option("--samples", o.samples, "number of samples")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfigError;
    }

    try {
        if (run->parsed()) return cmd_run(o);
        if (eps->parsed()) return cmd_eps_sweep(o);
        if (hs->parsed()) return cmd_h_sweep(o);
        if (ex2->parsed()) return cmd_example2(o);
        if (kc->parsed()) return cmd_kernel_check(o);
        if (tab->parsed()) return cmd_tabulate(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kSolverError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSolverError;
    }
    return 0;
}
