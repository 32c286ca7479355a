// One ancilla-assisted step on |alpha>, then the full LG function.
// Usage: demo_coherent_step [G] [alpha] [tau]

#include <cstdio>
#include <cstdlib>

#include "hybridlg/protocol.hpp"

int main(int argc, char** argv)
{
    using namespace hybridlg;
    const double G = argc > 1 ? std::atof(argv[1]) : 2.0;
    const double alpha = argc > 2 ? std::atof(argv[2]) : 1.0;
    const double tau = argc > 3 ? std::atof(argv[3]) : 0.3;

    const CoherentSuperposition m(CoherentLabel{alpha});
    const PostSelection ps = step_map_detailed(m, AncillaState::from_angle(tau), G);
    std::printf("G = %g, alpha = %g, tau = %g\n", G, alpha, tau);
    std::printf("entanglement before post-selection: %.6f bits\n", entanglement_entropy(G, alpha));
    std::printf("post-selection probability: %.6f\n", ps.probability);
    for (const auto& c : ps.post.components()) {
        std::printf("  weight % .6f%+.6fi on |% .3f%+.3fi>\n", c.weight.real(), c.weight.imag(), c.label.value().real(),
                    c.label.value().imag());
    }
    std::printf("P(+1 at t1) = %.9f\n", plus_probability(ps.post, CoherentLabel{alpha}));

    try {
        const ProtocolChain chain = build_chain(ProtocolParams(G, alpha, tau));
        const LGResult r = lg_function(chain);
        std::printf("resets: theta2 = %.9f, theta3 = %.9f\n", chain.reset2.theta, chain.reset3.theta);
        std::printf("C01 = %.6f  C12 = %.6f  C23 = %.6f  C03 = %.6f  K = %.6f\n", r.c01, r.c12, r.c23, r.c03, r.k);
    } catch (const NoSolution& e) {
        std::printf("no LG function here: %s\n", e.what());
    }
    return 0;
}
