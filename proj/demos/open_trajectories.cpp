// Quantum-jump ensemble for the damped hybrid system against the master equation.
// Usage: demo_open_trajectories [kappa] [trajectories] [seed]

#include <cstdio>
#include <cstdlib>
#include <numbers>

#include "hybridlg/fock.hpp"
#include "hybridlg/trajectory.hpp"

int main(int argc, char** argv)
{
    using namespace hybridlg;
    mcwf::TrajectoryConfig cfg;
    cfg.kappa_over_eta = argc > 1 ? std::atof(argv[1]) : 0.2;
    cfg.n_trajectories = argc > 2 ? std::atoi(argv[2]) : 2000;
    cfg.seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 0;
    cfg.cutoff = 24;
    cfg.stepper = mcwf::Stepper::exponential;
    cfg.dt = 0.01;
    const double G = 1.5;

    const FockVector m = coherent_fock(CoherentLabel{1.0}, cfg.cutoff);
    const FockVector v = fock::hybrid_vector(1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2, m);
    const mcwf::Model model = mcwf::model_for(cfg);
    const auto records = mcwf::run_ensemble(v, model, cfg, G);
    std::size_t jumps = 0;
    std::size_t jumped = 0;
    for (const auto& r : records) {
        jumps += r.jump_times.size();
        jumped += !r.jump_times.empty();
    }
    const DensityMatrix traj = mcwf::ensemble_average(records);
    const DensityMatrix exact =
        fock::lindblad_integrate(fock::projector(v), fock::build_heff(cfg.cutoff), cfg.kappa_over_eta, G, 0.002);
    std::printf("kappa = %g, G = %g, %d trajectories\n", cfg.kappa_over_eta, G, cfg.n_trajectories);
    std::printf("trajectories with a jump: %zu, total jumps: %zu\n", jumped, jumps);
    std::printf("trace distance to master equation: %.5f\n", fock::trace_distance(traj, exact));
    const Eigen::Matrix2cd a = fock::trace_out_oscillator(traj);
    std::printf("ancilla coherence |rho_-+|: trajectories %.6f, master equation %.6f\n", std::abs(a(0, 1)),
                std::abs(fock::trace_out_oscillator(exact)(0, 1)));
    return 0;
}
