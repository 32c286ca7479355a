#pragma once

// Brute-force closed-system protocol in the truncated number basis, used to
// check the coherent-state pipeline. Ancilla resets are inputs: they come from
// the coherent chain, so the comparison covers every other stage.

#include <array>

#include "hybridlg/coherent.hpp"
#include "hybridlg/fock.hpp"
#include "hybridlg/protocol.hpp"

namespace hybridlg::fock {

struct FockProtocolResult {
    std::array<IntervalStatistics, 3> intervals;
    LGResult result;
    int cutoff = 0;
};

class FockProtocol {
public:
    FockProtocol(const ProtocolParams& p, int cutoff)
        : params_(p), cutoff_(cutoff), propagator_(build_heff(cutoff)), alpha_(coherent_fock(p.label(), cutoff))
    {
    }

    [[nodiscard]] int cutoff() const { return cutoff_; }
    [[nodiscard]] const FockVector& alpha() const { return alpha_; }

    /// Conditional kick for time G, then <+_x| and renormalisation.
    [[nodiscard]] FockVector step(const FockVector& m, const AncillaState& a, double G) const
    {
        const FockVector out = project_plus_x(propagator_.apply(hybrid_vector(a.c_minus(), a.c_plus(), m), G));
        const double n = out.norm();
        if (!(n * n > kDegenerateNorm)) {
            throw DegenerateState("ancilla post-selection on |+x> has vanishing probability");
        }
        return out / n;
    }

    [[nodiscard]] double plus_probability(const FockVector& m) const { return std::norm(alpha_.dot(m)); }

    [[nodiscard]] FockVector collapse_minus(const FockVector& m) const
    {
        const FockVector rest = m - alpha_.dot(m) * alpha_;
        const double n = rest.norm();
        if (!(n * n > kDegenerateNorm)) {
            throw DegenerateState("outcome I - |alpha><alpha| has vanishing probability");
        }
        return rest / n;
    }

    [[nodiscard]] FockProtocolResult run(const ProtocolChain& chain) const
    {
        const double G = params_.G;
        FockProtocolResult out;
        out.cutoff = cutoff_;
        std::array<FockVector, 3> before;
        before[0] = alpha_;
        before[1] = step(before[0], chain.ancilla_for_step(1), G);
        before[2] = step(before[1], chain.ancilla_for_step(2), G);
        for (int i = 0; i < 3; ++i) {
            const AncillaState a = chain.ancilla_for_step(i + 1);
            IntervalStatistics& s = out.intervals[static_cast<std::size_t>(i)];
            s.p_i_plus = std::min(1.0, plus_probability(before[static_cast<std::size_t>(i)]));
            s.p_plus_given_plus = plus_probability(step(alpha_, a, G));
            if (1.0 - s.p_i_plus >= kDegenerateNorm) {
                s.minus_possible = true;
                s.p_plus_given_minus =
                    plus_probability(step(collapse_minus(before[static_cast<std::size_t>(i)]), a, G));
            }
        }
        const FockVector r03 = step(alpha_, AncillaState::from_angle(3.0 * params_.tau), 3.0 * G);
        out.result = LGResult::assemble(out.intervals[0].correlator(), out.intervals[1].correlator(),
                                        out.intervals[2].correlator(), 2.0 * plus_probability(r03) - 1.0);
        return out;
    }

private:
    ProtocolParams params_;
    int cutoff_;
    UnitaryPropagator propagator_;
    FockVector alpha_;
};

[[nodiscard]] inline FockProtocolResult run_protocol(const ProtocolParams& p, const ProtocolChain& chain, int cutoff)
{
    return FockProtocol(p, cutoff).run(chain);
}

}  // namespace hybridlg::fock
