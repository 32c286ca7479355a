// Command-line front end: parameter sweeps and oracle checks, written as CSV.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hybridlg/commands.hpp"

namespace {

using hybridlg::cli::RunConfig;
using nlohmann::json;

struct GridFlags {
    std::optional<double> start;
    std::optional<double> stop;
    std::optional<double> step;

    void add(CLI::App* app, const std::string& name, const std::string& what)
    {
        app->add_option("--" + name + "-start", start, what + " grid start");
        app->add_option("--" + name + "-stop", stop, what + " grid stop (inclusive)");
        app->add_option("--" + name + "-step", step, what + " grid step");
    }

    void apply(hybridlg::spin::Grid& g) const
    {
        if (start) {
            g.start = *start;
        }
        if (stop) {
            g.stop = *stop;
        }
        if (step) {
            g.step = *step;
        }
    }
};

struct Flags {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> config;
    std::optional<unsigned> threads;
    GridFlags dtau;
    GridFlags g_grid;
    GridFlags tau;
    std::optional<std::vector<double>> g_list;
    std::optional<double> G;
    std::optional<double> alpha;
    std::optional<double> probe_tau;
    std::optional<double> kappa;
    std::optional<double> dt;
    std::optional<int> trajectories;
    std::optional<int> cutoff;
    std::optional<std::string> stepper;
    std::optional<int> samples;
};

void read_grid(const json& j, hybridlg::spin::Grid& g)
{
    g.start = j.value("start", g.start);
    g.stop = j.value("stop", g.stop);
    g.step = j.value("step", g.step);
}

void apply_config_file(const std::string& path, RunConfig& cfg)
{
    std::ifstream in(path);
    if (!in) {
        throw hybridlg::InvalidArgument("cannot open config file '" + path + "'");
    }
    const json j = json::parse(in);
    cfg.out = j.value("out", cfg.out);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("dtau")) {
        read_grid(j.at("dtau"), cfg.dtau);
    }
    if (j.contains("tau")) {
        read_grid(j.at("tau"), cfg.tau);
    }
    if (j.contains("G")) {
        // A grid for the entropy sweep, a single coupling otherwise.
        if (j.at("G").is_object()) {
            read_grid(j.at("G"), cfg.g_grid);
        } else {
            cfg.G = j.at("G").get<double>();
        }
    }
    if (j.contains("g_list")) {
        cfg.g_list = j.at("g_list").get<std::vector<double>>();
    }
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.probe_tau = j.value("probe_tau", cfg.probe_tau);
    cfg.kappa = j.value("kappa", cfg.kappa);
    cfg.dt = j.value("dt", cfg.dt);
    cfg.n_trajectories = j.value("trajectories", cfg.n_trajectories);
    cfg.cutoff = j.value("cutoff", cfg.cutoff);
    if (j.contains("stepper")) {
        cfg.stepper = hybridlg::mcwf::stepper_from_string(j.at("stepper").get<std::string>());
    }
    cfg.samples = j.value("samples", cfg.samples);
}

void apply_flags(const Flags& f, RunConfig& cfg)
{
    if (f.out) {
        cfg.out = *f.out;
    }
    if (f.seed) {
        cfg.seed = *f.seed;
    }
    if (f.threads) {
        cfg.threads = *f.threads;
    }
    f.dtau.apply(cfg.dtau);
    f.g_grid.apply(cfg.g_grid);
    f.tau.apply(cfg.tau);
    if (f.g_list) {
        cfg.g_list = *f.g_list;
    }
    if (f.G) {
        cfg.G = *f.G;
    }
    if (f.alpha) {
        cfg.alpha = *f.alpha;
    }
    if (f.probe_tau) {
        cfg.probe_tau = *f.probe_tau;
    }
    if (f.kappa) {
        cfg.kappa = *f.kappa;
    }
    if (f.dt) {
        cfg.dt = *f.dt;
    }
    if (f.trajectories) {
        cfg.n_trajectories = *f.trajectories;
    }
    if (f.cutoff) {
        cfg.cutoff = *f.cutoff;
    }
    if (f.stepper) {
        cfg.stepper = hybridlg::mcwf::stepper_from_string(*f.stepper);
    }
    if (f.samples) {
        cfg.samples = *f.samples;
    }
}

void add_common(CLI::App* app, Flags& f)
{
    app->add_option("--out", f.out, "Output CSV path, '-' for stdout (default '-')");
    app->add_option("--seed", f.seed, "Random seed (default 0)");
    app->add_option("--config", f.config, "JSON config file; flags given on the command line take precedence");
    app->add_option("--threads", f.threads, "Worker threads (default 1)")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Leggett-Garg tests for a hybrid ancilla-oscillator system.\n"
                 "All angles are in radians; couplings, times and rates are dimensionless in units where eta = 1."};
    app.require_subcommand(1);
    app.set_version_flag("--version", hybridlg::cli::kVersion);
    Flags f;

    auto* spin = app.add_subcommand("spin-lg", "Spin-1/2 benchmark: K against dtau, peak and violation windows");
    add_common(spin, f);
    f.dtau.add(spin, "dtau", "dtau");

    auto* entropy = app.add_subcommand("entropy", "Ancilla-oscillator entanglement entropy against G");
    add_common(entropy, f);
    f.g_grid.add(entropy, "g", "G");

    auto* hybrid = app.add_subcommand("hybrid-lg", "Oscillator LG function: C01, C12, C23, C03 and K against tau");
    add_common(hybrid, f);
    hybrid->add_option("--G", f.G, "Integrated coupling G (default 5)");
    hybrid->add_option("--alpha", f.alpha, "Real coherent amplitude (default 1)");
    f.tau.add(hybrid, "tau", "tau");

    auto* probe = app.add_subcommand("probe-prob", "Conditional probability P10(+|+) against tau for a list of G");
    add_common(probe, f);
    probe->add_option("--alpha", f.alpha, "Real coherent amplitude (default 1)");
    probe->add_option("--g-list", f.g_list, "Couplings G, comma separated")->delimiter(',');
    f.tau.add(probe, "tau", "tau");

    auto* open = app.add_subcommand("open-lg", "LG function with a damped oscillator (quantum trajectories)");
    add_common(open, f);
    open->add_option("--G", f.G, "Coupling of the tau sweep (default 2)");
    open->add_option("--alpha", f.alpha, "Real coherent amplitude (default 1)");
    f.tau.add(open, "tau", "tau");
    open->add_option("--g-list", f.g_list, "Couplings probed at --probe-tau (default 2.5,3,3.5)")->delimiter(',');
    open->add_option("--probe-tau", f.probe_tau, "tau of the G probe (default pi/10)");
    open->add_option("--kappa", f.kappa, "Damping rate kappa/eta (default 1e-3)");
    open->add_option("--dt", f.dt, "Trajectory step; 0 picks the stepper default");
    open->add_option("--trajectories", f.trajectories, "Trajectories per protocol map (default 4000)");
    open->add_option("--cutoff", f.cutoff, "Fock cutoff; 0 picks the coherent-tail rule");
    open->add_option("--stepper", f.stepper, "euler or exponential (default exponential)");

    auto* verify = app.add_subcommand("verify", "Randomised coherent-state vs Fock-oracle checks");
    add_common(verify, f);
    verify->add_option("--samples", f.samples, "Random parameter points (default 20)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const std::string command = app.get_subcommands().front()->get_name();
        RunConfig cfg = RunConfig::defaults(command);
        if (f.config) {
            apply_config_file(*f.config, cfg);
        }
        apply_flags(f, cfg);

        const hybridlg::cli::ResultTable table = hybridlg::cli::run_command(cfg);
        if (cfg.out == "-") {
            table.write_csv(std::cout);
        } else {
            std::ofstream os(cfg.out);
            if (!os) {
                throw hybridlg::InvalidArgument("cannot write '" + cfg.out + "'");
            }
            table.write_csv(os);
        }
        if (command == "verify" && table.meta("all_pass") != "1") {
            std::cerr << "verify: at least one check exceeded its tolerance\n";
            return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
