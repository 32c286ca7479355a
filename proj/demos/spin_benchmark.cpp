// Spin-1/2 Leggett-Garg function: a coarse table, the peak and the window.

#include <cstdio>
#include <numbers>

#include "hybridlg/spin.hpp"
#include "hybridlg/sweep.hpp"

int main()
{
    using namespace hybridlg;
    std::printf("%8s %10s %10s %10s\n", "dtau", "K", "C01", "C03");
    for (int k = 0; k <= 16; ++k) {
        const double x = std::numbers::pi / 32.0 * k;
        std::printf("%8.4f %10.6f %10.6f %10.6f\n", x, spin::spin_lg(x), spin::spin_correlator(0, 1, x),
                    spin::spin_correlator(0, 3, x));
    }
    const Peak peak = refine_maximum([](double x) { return spin::spin_lg(x); }, 0.0, std::numbers::pi / 4.0, 1e-10);
    std::printf("peak K = %.9f at dtau = %.9f (2 sqrt 2 = %.9f)\n", peak.value, peak.x, spin::kMaxViolation);
    for (const auto& w : spin::violation_windows({0.0, 0.5 * std::numbers::pi, std::numbers::pi / 800.0})) {
        std::printf("K > 2 on (%.6f, %.6f)\n", w.start, w.end);
    }
    return 0;
}
