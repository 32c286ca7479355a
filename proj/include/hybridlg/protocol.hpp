#pragma once

// Ancilla-assisted Leggett-Garg protocol for a mechanical mode.
//
// One protocol step: prepare the ancilla in c_-|-1> + c_+|+1>, let
// H = |+1><+1| (b^dag + b) act for an integrated coupling G (a conditional
// momentum kick D(-iG)), then post-select the ancilla on |+_x>. On the
// oscillator this is the Kraus map m -> N (c_- m + c_+ D(-iG) m).
//
// Logical readout at every t_j is the POVM {|alpha><alpha|, I - |alpha><alpha|},
// outcome +1 for the first element. Between measurements the ancilla is reset
// to coefficients solved so that the |alpha> weight of the unmeasured protocol
// state follows |cos(k tau)|, the spin-1/2 amplitude it imitates.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "hybridlg/coherent.hpp"
#include "hybridlg/errors.hpp"

namespace hybridlg {

/// Ancilla amplitudes on |-1>_A and |+1>_A.
class AncillaState {
public:
    AncillaState(Complex c_minus, Complex c_plus) : c_minus_(c_minus), c_plus_(c_plus)
    {
        if (std::abs(std::norm(c_minus) + std::norm(c_plus) - 1.0) > 1e-12) {
            throw InvalidArgument("ancilla amplitudes must satisfy |c-|^2 + |c+|^2 = 1");
        }
    }

    /// cos(theta)|-1> + sin(theta)|+1>
    static AncillaState from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }

    [[nodiscard]] Complex c_minus() const noexcept { return c_minus_; }
    [[nodiscard]] Complex c_plus() const noexcept { return c_plus_; }

private:
    Complex c_minus_;
    Complex c_plus_;
};

/// c_-|-1>_A (x) branch_minus + c_+|+1>_A (x) branch_plus with the ancilla
/// weights folded into the branches.
struct HybridState {
    CoherentSuperposition branch_minus;
    CoherentSuperposition branch_plus;

    [[nodiscard]] double norm_squared() const
    {
        return hybridlg::norm_squared(branch_minus) + hybridlg::norm_squared(branch_plus);
    }

    /// Reduced ancilla state in the {|-1>, |+1>} basis.
    [[nodiscard]] Eigen::Matrix2cd reduced_ancilla() const
    {
        Eigen::Matrix2cd rho;
        rho(0, 0) = inner(branch_minus, branch_minus);
        rho(1, 1) = inner(branch_plus, branch_plus);
        rho(0, 1) = inner(branch_plus, branch_minus);
        rho(1, 0) = std::conj(rho(0, 1));
        return rho;
    }
};

struct ProtocolParams {
    double G = 0.0;      // integrated coupling eta t
    double alpha = 1.0;  // initial coherent amplitude (real)
    double tau = 0.0;    // ancilla preparation angle

    ProtocolParams() = default;
    ProtocolParams(double g, double a, double t) : G(g), alpha(a), tau(t) { validate(); }

    /// Rejects complex amplitudes: the protocol is defined for real alpha only.
    static ProtocolParams make(double g, Complex a, double t)
    {
        if (a.imag() != 0.0) {
            throw InvalidArgument("alpha must be real");
        }
        return {g, a.real(), t};
    }

    void validate() const
    {
        if (!std::isfinite(G) || G < 0.0) {
            throw InvalidArgument("G must be finite and non-negative");
        }
        if (!std::isfinite(alpha) || !std::isfinite(tau)) {
            throw InvalidArgument("alpha and tau must be finite");
        }
    }

    [[nodiscard]] CoherentLabel label() const { return CoherentLabel{alpha}; }
};

struct LGResult {
    double c01 = 0.0;
    double c12 = 0.0;
    double c23 = 0.0;
    double c03 = 0.0;
    double k = 0.0;

    static LGResult assemble(double c01, double c12, double c23, double c03)
    {
        return {c01, c12, c23, c03, std::abs(c01 + c12 + c23 - c03)};
    }
};

[[nodiscard]] inline HybridState conditional_displace(const AncillaState& a, const CoherentSuperposition& m, double G)
{
    return {a.c_minus() * m, a.c_plus() * displace_momentum(m, G)};
}

/// Closed form S(G) = -sum_s (1/2 + s e^{-G^2/2}/2) log2(1/2 + s e^{-G^2/2}/2).
[[nodiscard]] inline double entanglement_entropy_closed_form(double G)
{
    const double d = std::exp(-0.5 * G * G);
    double s = 0.0;
    for (double p : {0.5 + 0.5 * d, 0.5 - 0.5 * d}) {
        if (p > 0.0) {
            s -= p * std::log2(p);
        }
    }
    return s;
}

[[nodiscard]] inline double von_neumann_entropy_bits(const Eigen::Matrix2cd& rho)
{
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> eig(rho, Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index k = 0; k < 2; ++k) {
        const double p = eig.eigenvalues()(k);
        if (p > 1e-300) {
            s -= p * std::log2(p);
        }
    }
    return s;
}

/// Ancilla-oscillator entanglement after one conditional kick with c_+- = 1/sqrt(2),
/// from the eigenvalues of the reduced ancilla state.
[[nodiscard]] inline double entanglement_entropy(double G, double alpha = 0.0)
{
    if (!(G >= 0.0)) {
        throw InvalidArgument("G must be non-negative");
    }
    const double h = 1.0 / std::numbers::sqrt2;
    const HybridState state =
        conditional_displace(AncillaState{h, h}, CoherentSuperposition(CoherentLabel{alpha}), G);
    return von_neumann_entropy_bits(state.reduced_ancilla());
}

struct PostSelection {
    double probability;
    CoherentSuperposition post;
};

/// Projects the ancilla on |+_x> = (|+1> + |-1>)/sqrt(2).
[[nodiscard]] inline PostSelection postselect_plus_x(const HybridState& h)
{
    const CoherentSuperposition joined = Complex{1.0 / std::numbers::sqrt2, 0.0} * (h.branch_minus + h.branch_plus);
    const double p = norm_squared(joined);
    if (p < kDegenerateNorm) {
        throw DegenerateState("ancilla post-selection on |+x> has vanishing probability");
    }
    return {p, normalize(joined)};
}

/// One protocol step including the post-selection probability.
[[nodiscard]] inline PostSelection step_map_detailed(const CoherentSuperposition& m, const AncillaState& a, double G)
{
    return postselect_plus_x(conditional_displace(a, m, G));
}

[[nodiscard]] inline CoherentSuperposition step_map(const CoherentSuperposition& m, const AncillaState& a, double G)
{
    return step_map_detailed(m, a, G).post;
}

struct ResetSolution {
    double theta;  // ancilla angle: B = cos(theta) on |-1>, A = sin(theta) on |+1>
    AncillaState ancilla;

    [[nodiscard]] double a_coefficient() const { return ancilla.c_plus().real(); }
    [[nodiscard]] double b_coefficient() const { return ancilla.c_minus().real(); }
};

/// Finds real, non-negative (A, B) = (sin theta, cos theta) such that the |alpha>
/// weight of step_map(current, ancilla) has modulus |cos(k tau)|. The root
/// closest to theta = 0 (smallest kick amplitude) is returned, refined by
/// bisection to 1e-12.
[[nodiscard]] inline ResetSolution solve_reset_coefficients(int k, const ProtocolParams& p,
                                                            const CoherentSuperposition& current)
{
    if (k != 2 && k != 3) {
        throw InvalidArgument("reset coefficients are defined for steps 2 and 3");
    }
    const CoherentLabel alpha = p.label();
    const double target = std::abs(std::cos(k * p.tau));
    auto residual = [&](double theta) {
        const CoherentSuperposition out = step_map(current, AncillaState::from_angle(theta), p.G);
        return std::abs(out.weight_of(alpha)) - target;
    };

    constexpr int kScan = 256;
    constexpr double kHalfPi = 0.5 * std::numbers::pi;
    double lo = 0.0;
    double f_lo = residual(lo);
    if (std::abs(f_lo) < 1e-15) {
        return {0.0, AncillaState::from_angle(0.0)};
    }
    for (int s = 1; s <= kScan; ++s) {
        const double hi = kHalfPi * s / kScan;
        const double f_hi = residual(hi);
        if ((f_lo < 0.0) != (f_hi < 0.0) || f_hi == 0.0) {
            double a = lo;
            double b = hi;
            double fa = f_lo;
            while (b - a > 1e-12) {
                const double mid = 0.5 * (a + b);
                const double fm = residual(mid);
                if ((fa < 0.0) == (fm < 0.0) && fm != 0.0) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            const double theta = 0.5 * (a + b);
            return {theta, AncillaState::from_angle(theta)};
        }
        lo = hi;
        f_lo = f_hi;
    }
    throw NoSolution("no ancilla reset reproduces |cos(" + std::to_string(k) + " tau)| at G=" +
                     std::to_string(p.G) + ", tau=" + std::to_string(p.tau));
}

/// Unmeasured protocol states and the ancilla resets derived from them.
struct ProtocolChain {
    ProtocolParams params;
    CoherentSuperposition phi0;
    CoherentSuperposition phi1;
    ResetSolution reset2;
    CoherentSuperposition phi2;
    ResetSolution reset3;
    CoherentSuperposition phi3;

    [[nodiscard]] const CoherentSuperposition& state_at(int t) const
    {
        switch (t) {
        case 0: return phi0;
        case 1: return phi1;
        case 2: return phi2;
        case 3: return phi3;
        default: throw InvalidArgument("measurement times are 0..3");
        }
    }

    /// Ancilla preparation for the step ending at time t.
    [[nodiscard]] AncillaState ancilla_for_step(int t) const
    {
        switch (t) {
        case 1: return AncillaState::from_angle(params.tau);
        case 2: return reset2.ancilla;
        case 3: return reset3.ancilla;
        default: throw InvalidArgument("protocol steps end at times 1..3");
        }
    }
};

[[nodiscard]] inline ProtocolChain build_chain(const ProtocolParams& p)
{
    p.validate();
    CoherentSuperposition phi0(p.label());
    CoherentSuperposition phi1 = step_map(phi0, AncillaState::from_angle(p.tau), p.G);
    ResetSolution r2 = solve_reset_coefficients(2, p, phi1);
    CoherentSuperposition phi2 = step_map(phi1, r2.ancilla, p.G);
    ResetSolution r3 = solve_reset_coefficients(3, p, phi2);
    CoherentSuperposition phi3 = step_map(phi2, r3.ancilla, p.G);
    return {p, std::move(phi0), std::move(phi1), r2, std::move(phi2), r3, std::move(phi3)};
}

/// Statistics of one measurement interval (t_i, t_j = t_i + 1).
struct IntervalStatistics {
    double p_i_plus = 1.0;            // P(+1 at t_i)
    double p_plus_given_plus = 0.0;   // P(+1 at t_j | +1 at t_i)
    double p_plus_given_minus = 0.0;  // P(+1 at t_j | -1 at t_i); unused when P(-1 at t_i) ~ 0
    bool minus_possible = false;

    [[nodiscard]] double p_i_minus() const { return 1.0 - p_i_plus; }

    [[nodiscard]] double correlator() const
    {
        double c = p_i_plus * (2.0 * p_plus_given_plus - 1.0);
        if (minus_possible) {
            c += p_i_minus() * (1.0 - 2.0 * p_plus_given_minus);
        }
        return c;
    }
};

[[nodiscard]] inline double plus_probability(const CoherentSuperposition& s, CoherentLabel alpha)
{
    return povm_plus(s, alpha).probability;
}

[[nodiscard]] inline IntervalStatistics interval_statistics(const ProtocolChain& chain, int i)
{
    if (i < 0 || i > 2) {
        throw IndexOrder("consecutive intervals start at t_0, t_1 or t_2");
    }
    const CoherentLabel alpha = chain.params.label();
    const double G = chain.params.G;
    const AncillaState ancilla = chain.ancilla_for_step(i + 1);
    const CoherentSuperposition& before = chain.state_at(i);

    IntervalStatistics out;
    out.p_i_plus = plus_probability(before, alpha);
    out.p_plus_given_plus = plus_probability(step_map(CoherentSuperposition(alpha), ancilla, G), alpha);
    if (1.0 - out.p_i_plus >= kDegenerateNorm) {
        const PovmResult minus = povm_minus(before, alpha);
        out.minus_possible = true;
        out.p_plus_given_minus = plus_probability(step_map(minus.post, ancilla, G), alpha);
    }
    return out;
}

/// P(+1 at t_j | outcome_i at t_i) for (i, j) in {(0,1), (1,2), (2,3)}.
[[nodiscard]] inline double conditional_probability(int i, int j, int outcome_i, const ProtocolParams& p)
{
    if (j != i + 1 || i < 0 || i > 2) {
        throw IndexOrder("conditional probabilities are defined for (0,1), (1,2), (2,3)");
    }
    if (outcome_i != 1 && outcome_i != -1) {
        throw InvalidArgument("outcomes are +1 or -1");
    }
    ProtocolChain chain = [&] {
        if (i == 0) {
            // Only the first step is needed; skip the reset solves.
            CoherentSuperposition phi0(p.label());
            CoherentSuperposition phi1 = step_map(phi0, AncillaState::from_angle(p.tau), p.G);
            ResetSolution dummy{0.0, AncillaState::from_angle(0.0)};
            return ProtocolChain{p, phi0, phi1, dummy, phi1, dummy, phi1};
        }
        return build_chain(p);
    }();
    const IntervalStatistics s = interval_statistics(chain, i);
    if (outcome_i == 1) {
        if (s.p_i_plus < kDegenerateNorm) {
            throw DegenerateState("conditioning outcome +1 has vanishing probability");
        }
        return s.p_plus_given_plus;
    }
    if (!s.minus_possible) {
        throw DegenerateState("conditioning outcome -1 has vanishing probability");
    }
    return s.p_plus_given_minus;
}

/// C03 through the single-step machinery with tau -> 3 tau and G -> 3 G.
[[nodiscard]] inline double correlator_03(const ProtocolParams& p)
{
    const CoherentLabel alpha = p.label();
    const CoherentSuperposition out =
        step_map(CoherentSuperposition(alpha), AncillaState::from_angle(3.0 * p.tau), 3.0 * p.G);
    return 2.0 * plus_probability(out, alpha) - 1.0;
}

/// Diagnostic C03 from three unmeasured protocol steps (no acceptance weight).
[[nodiscard]] inline double correlator_03_unmeasured(const ProtocolChain& chain)
{
    return 2.0 * plus_probability(chain.phi3, chain.params.label()) - 1.0;
}

[[nodiscard]] inline double correlator(int i, int j, const ProtocolParams& p)
{
    if (i == 0 && j == 3) {
        return correlator_03(p);
    }
    if (j != i + 1 || i < 0 || i > 2) {
        throw IndexOrder("correlators are defined for (0,1), (1,2), (2,3), (0,3)");
    }
    if (i == 0) {
        const CoherentLabel alpha = p.label();
        const CoherentSuperposition phi1 =
            step_map(CoherentSuperposition(alpha), AncillaState::from_angle(p.tau), p.G);
        return 2.0 * plus_probability(phi1, alpha) - 1.0;
    }
    return interval_statistics(build_chain(p), i).correlator();
}

[[nodiscard]] inline LGResult lg_function(const ProtocolChain& chain)
{
    return LGResult::assemble(interval_statistics(chain, 0).correlator(), interval_statistics(chain, 1).correlator(),
                              interval_statistics(chain, 2).correlator(), correlator_03(chain.params));
}

[[nodiscard]] inline LGResult lg_function(const ProtocolParams& p)
{
    return lg_function(build_chain(p));
}

}  // namespace hybridlg
