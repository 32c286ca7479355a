#pragma once

// Leggett-Garg protocol with a damped oscillator. Each protocol step is an
// unravelled master-equation run of duration G (unit coupling), followed by
// post-selection of the ancilla on |+_x> and the partial trace over it. The
// logical POVM then acts on the oscillator density matrix.

#include <cstdint>
#include <vector>

#include "hybridlg/coherent.hpp"
#include "hybridlg/fock.hpp"
#include "hybridlg/protocol.hpp"
#include "hybridlg/trajectory.hpp"

namespace hybridlg::open {

using mcwf::TrajectoryConfig;

struct OpenStepResult {
    double probability;  // post-selection probability
    DensityMatrix state;  // normalised oscillator state
};

/// Post-selects the averaged ensemble on |+_x> and traces out the ancilla.
/// Projection is linear, so it is applied trajectory by trajectory before the
/// weighted sum.
[[nodiscard]] inline OpenStepResult postselect(const mcwf::WeightedEnsemble& ensemble)
{
    const DensityMatrix rho = ensemble.density([](const FockVector& v) { return fock::project_plus_x(v); });
    const double p = rho.trace().real();
    if (p < kDegenerateNorm) {
        throw DegenerateState("ancilla post-selection on |+x> has vanishing probability");
    }
    return {p, rho / p};
}

/// Open protocol step started from a pure ancilla (x) oscillator vector.
[[nodiscard]] inline OpenStepResult open_step_map(const FockVector& hybrid, const TrajectoryConfig& cfg, double t_final,
                                                  std::uint64_t stream = 0)
{
    const mcwf::Model model = mcwf::model_for(cfg);
    return postselect(mcwf::run_mixed_ensemble({1.0}, {hybrid}, model, cfg, t_final, stream));
}

/// Unravels rho (x) |a><a| through its eigendecomposition.
[[nodiscard]] inline mcwf::WeightedEnsemble unravel_step(const DensityMatrix& oscillator, const AncillaState& ancilla,
                                                         const mcwf::Model& model, const TrajectoryConfig& cfg,
                                                         double t_final, std::uint64_t stream)
{
    const Eigen::SelfAdjointEigenSolver<DensityMatrix> eig(0.5 * (oscillator + oscillator.adjoint()));
    std::vector<double> probs;
    std::vector<FockVector> parts;
    for (Eigen::Index k = eig.eigenvalues().size() - 1; k >= 0; --k) {
        probs.push_back(eig.eigenvalues()(k));
        parts.push_back(fock::hybrid_vector(ancilla.c_minus(), ancilla.c_plus(), eig.eigenvectors().col(k)));
    }
    return mcwf::run_mixed_ensemble(probs, parts, model, cfg, t_final, stream);
}

/// Open protocol step for a mixed oscillator input and a pure ancilla.
[[nodiscard]] inline OpenStepResult open_step_map(const DensityMatrix& oscillator, const AncillaState& ancilla,
                                                  const mcwf::Model& model, const TrajectoryConfig& cfg,
                                                  double t_final, std::uint64_t stream)
{
    return postselect(unravel_step(oscillator, ancilla, model, cfg, t_final, stream));
}

/// <alpha| rho |alpha>
[[nodiscard]] inline double plus_probability(const DensityMatrix& rho, const FockVector& alpha)
{
    return std::clamp(fock::expectation(rho, alpha) / rho.trace().real(), 0.0, 1.0);
}

/// (I - |alpha><alpha|) rho (I - |alpha><alpha|), normalised.
[[nodiscard]] inline DensityMatrix collapse_minus(const DensityMatrix& rho, const FockVector& alpha)
{
    const FockOperator q = FockOperator::Identity(rho.rows(), rho.cols()) - alpha * alpha.adjoint();
    const DensityMatrix out = q * rho * q;
    const double p = out.trace().real();
    if (p < kDegenerateNorm) {
        throw DegenerateState("outcome I - |alpha><alpha| has vanishing probability");
    }
    return out / p;
}

/// Smallest cutoff whose coherent-state tail stays below 1e-10 for every label
/// reached by the protocol, |alpha - 3iG| at most.
[[nodiscard]] inline int protocol_cutoff(const ProtocolParams& p)
{
    return coherent_cutoff(std::abs(Complex{p.alpha, -3.0 * p.G}));
}

/// Stream tags keep the random numbers of each protocol map fixed across
/// parameter points.
enum Stream : std::uint64_t {
    kStep1 = 1,
    kStep03 = 2,
    kStep2 = 3,
    kPlus12 = 4,
    kMinus12 = 5,
    kPlus23 = 6,
    kMinus23 = 7,
};

struct OpenLGDetail {
    LGResult result;
    std::array<double, 3> p_plus{};             // P(+1 at t_i), i = 0, 1, 2 (unconditioned chain)
    std::array<double, 3> p_plus_given_plus{};  // interval (i, i + 1)
    std::array<double, 3> p_plus_given_minus{};
    long trajectories = 0;
    long jumped = 0;
};

/// Four-correlator pipeline with open steps. Resets come from the closed-system
/// chain because the open chain has no pure state to match against.
[[nodiscard]] inline OpenLGDetail open_lg_detail(const ProtocolParams& p, TrajectoryConfig cfg)
{
    p.validate();
    if (cfg.cutoff <= 0) {
        cfg.cutoff = protocol_cutoff(p);
    }
    cfg.validate(std::norm(Complex{p.alpha, -3.0 * p.G}) + 1.0);
    const ProtocolChain chain = build_chain(p);
    const mcwf::Model model = mcwf::model_for(cfg);
    const FockVector alpha = coherent_fock(p.label(), cfg.cutoff);
    const DensityMatrix pure_alpha = fock::projector(alpha);

    OpenLGDetail d;
    auto track = [&](const mcwf::WeightedEnsemble& e) {
        d.trajectories += e.trajectories;
        d.jumped += e.jumped;
    };
    auto step = [&](const DensityMatrix& in, const AncillaState& a, double G, std::uint64_t stream) {
        const mcwf::WeightedEnsemble e = unravel_step(in, a, model, cfg, G, stream);
        track(e);
        return postselect(e).state;
    };

    const DensityMatrix r1 = step(pure_alpha, chain.ancilla_for_step(1), p.G, kStep1);
    const DensityMatrix r03 = step(pure_alpha, AncillaState::from_angle(3.0 * p.tau), 3.0 * p.G, kStep03);
    const DensityMatrix r2 = step(r1, chain.ancilla_for_step(2), p.G, kStep2);

    const double c01 = 2.0 * plus_probability(r1, alpha) - 1.0;
    const double c03 = 2.0 * plus_probability(r03, alpha) - 1.0;
    d.p_plus = {1.0, plus_probability(r1, alpha), plus_probability(r2, alpha)};
    d.p_plus_given_plus[0] = plus_probability(r1, alpha);

    auto interval = [&](int i, const DensityMatrix& before, std::uint64_t plus_stream, std::uint64_t minus_stream) {
        const AncillaState a = chain.ancilla_for_step(i + 1);
        const double w = plus_probability(before, alpha);
        const double ppp = plus_probability(step(pure_alpha, a, p.G, plus_stream), alpha);
        d.p_plus_given_plus[static_cast<std::size_t>(i)] = ppp;
        double c = w * (2.0 * ppp - 1.0);
        if (1.0 - w >= kDegenerateNorm) {
            const double ppm = plus_probability(step(collapse_minus(before, alpha), a, p.G, minus_stream), alpha);
            d.p_plus_given_minus[static_cast<std::size_t>(i)] = ppm;
            c += (1.0 - w) * (1.0 - 2.0 * ppm);
        }
        return c;
    };
    const double c12 = interval(1, r1, kPlus12, kMinus12);
    const double c23 = interval(2, r2, kPlus23, kMinus23);
    d.result = LGResult::assemble(c01, c12, c23, c03);
    return d;
}

[[nodiscard]] inline LGResult open_lg(const ProtocolParams& p, const TrajectoryConfig& cfg)
{
    return open_lg_detail(p, cfg).result;
}

}  // namespace hybridlg::open
