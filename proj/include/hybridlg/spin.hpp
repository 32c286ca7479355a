#pragma once

// Spin-1/2 Leggett-Garg reference: H = omega sigma_x, Q = sigma_z, four
// equally spaced measurement times. Correlators are obtained by enumerating
// the projective-measurement outcomes rather than from the cos(2 n dtau)
// shortcut, so the same pipeline shape is shared with the oscillator protocol.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "hybridlg/errors.hpp"
#include "hybridlg/types.hpp"

namespace hybridlg::spin {

/// Amplitudes on the sigma_z eigenstates |+1>, |-1>.
struct Qubit {
    Complex amp_plus{1.0, 0.0};
    Complex amp_minus{0.0, 0.0};

    static Qubit plus() { return {1.0, 0.0}; }
    static Qubit minus() { return {0.0, 1.0}; }

    [[nodiscard]] double norm_squared() const { return std::norm(amp_plus) + std::norm(amp_minus); }
};

/// exp(-i dtau sigma_x) = cos(dtau) I - i sin(dtau) sigma_x
[[nodiscard]] inline Qubit evolve_spin(const Qubit& q, double dtau) noexcept
{
    const double c = std::cos(dtau);
    const Complex mis{0.0, -std::sin(dtau)};
    return {c * q.amp_plus + mis * q.amp_minus, mis * q.amp_plus + c * q.amp_minus};
}

/// Joint outcome statistics for measurements at t_i and t_j.
struct JointProbabilities {
    // [outcome at t_i][outcome at t_j], index 0 for +1 and 1 for -1.
    std::array<std::array<double, 2>, 2> p{};

    [[nodiscard]] double correlator() const { return p[0][0] + p[1][1] - p[0][1] - p[1][0]; }
    [[nodiscard]] double total() const { return p[0][0] + p[0][1] + p[1][0] + p[1][1]; }
};

[[nodiscard]] inline JointProbabilities spin_joint_probabilities(int i, int j, double dtau,
                                                                 const Qubit& initial = Qubit::plus())
{
    if (i < 0 || j > 3 || i >= j) {
        throw IndexOrder("spin correlator needs 0 <= i < j <= 3");
    }
    const Qubit at_i = evolve_spin(initial, i * dtau);
    const std::array<double, 2> marginal{std::norm(at_i.amp_plus), std::norm(at_i.amp_minus)};
    const std::array<Qubit, 2> collapsed{Qubit::plus(), Qubit::minus()};
    JointProbabilities out;
    for (int a = 0; a < 2; ++a) {
        const Qubit at_j = evolve_spin(collapsed[a], (j - i) * dtau);
        out.p[a][0] = marginal[a] * std::norm(at_j.amp_plus);
        out.p[a][1] = marginal[a] * std::norm(at_j.amp_minus);
    }
    return out;
}

[[nodiscard]] inline double spin_correlator(int i, int j, double dtau, const Qubit& initial = Qubit::plus())
{
    return spin_joint_probabilities(i, j, dtau, initial).correlator();
}

/// K = |C01 + C12 + C23 - C03|
[[nodiscard]] inline double spin_lg(double dtau, const Qubit& initial = Qubit::plus())
{
    return std::abs(spin_correlator(0, 1, dtau, initial) + spin_correlator(1, 2, dtau, initial) +
                    spin_correlator(2, 3, dtau, initial) - spin_correlator(0, 3, dtau, initial));
}

/// l1-norm of coherence in the sigma_z basis.
[[nodiscard]] inline double l1_coherence(const Qubit& q) noexcept
{
    return 2.0 * std::abs(q.amp_plus) * std::abs(q.amp_minus);
}

struct Grid {
    double start;
    double stop;
    double step;

    [[nodiscard]] std::vector<double> points() const
    {
        if (!(step > 0.0) || !(stop > start) || !std::isfinite(start) || !std::isfinite(stop)) {
            throw EmptyGrid("grid needs step > 0 and stop > start");
        }
        std::vector<double> xs;
        const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
        for (long k = 0; k <= n; ++k) {
            xs.push_back(start + static_cast<double>(k) * step);
        }
        if (stop - xs.back() > 1e-12) {
            xs.push_back(stop);
        }
        return xs;
    }
};

struct Interval {
    double start;
    double end;
};

/// Maximal intervals of the grid where spin_lg > 2, with both ends refined by
/// bisection to 1e-6. Ends that coincide with the grid limits are not refined.
[[nodiscard]] inline std::vector<Interval> violation_windows(const Grid& grid)
{
    constexpr double kBound = 2.0;
    constexpr double kTol = 1e-6;
    const std::vector<double> xs = grid.points();
    auto excess = [](double x) { return spin_lg(x) - kBound; };
    auto refine = [&](double inside, double outside) {
        while (std::abs(outside - inside) > kTol) {
            const double mid = 0.5 * (inside + outside);
            (excess(mid) > 0.0 ? inside : outside) = mid;
        }
        return 0.5 * (inside + outside);
    };

    std::vector<Interval> windows;
    std::size_t k = 0;
    while (k < xs.size()) {
        if (excess(xs[k]) <= 0.0) {
            ++k;
            continue;
        }
        const std::size_t first = k;
        while (k + 1 < xs.size() && excess(xs[k + 1]) > 0.0) {
            ++k;
        }
        const double lo = first == 0 ? xs.front() : refine(xs[first], xs[first - 1]);
        const double hi = k + 1 == xs.size() ? xs.back() : refine(xs[k], xs[k + 1]);
        windows.push_back({lo, hi});
        ++k;
    }
    return windows;
}

inline constexpr double kMaxViolation = 2.0 * std::numbers::sqrt2;

}  // namespace hybridlg::spin
