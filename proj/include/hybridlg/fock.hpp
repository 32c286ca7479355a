#pragma once

// Truncated number-basis representation of the ancilla (x) oscillator system.
// Compound vectors are ancilla-major: index a * (cutoff + 1) + n with a = 0 for
// |-1>_A and a = 1 for |+1>_A. The effective Hamiltonian carries unit coupling,
// so evolving for time G realises a conditional kick of size G.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include "hybridlg/coherent.hpp"
#include "hybridlg/errors.hpp"
#include "hybridlg/types.hpp"

namespace hybridlg::fock {

[[nodiscard]] inline Eigen::Index mode_dim(int cutoff) { return cutoff + 1; }
[[nodiscard]] inline Eigen::Index hybrid_dim(int cutoff) { return 2 * (cutoff + 1); }

inline void require_cutoff(int cutoff)
{
    if (cutoff < 1) {
        throw InvalidArgument("cutoff must be at least 1");
    }
}

[[nodiscard]] inline FockOperator annihilation(int cutoff)
{
    require_cutoff(cutoff);
    FockOperator b = FockOperator::Zero(mode_dim(cutoff), mode_dim(cutoff));
    for (int n = 1; n <= cutoff; ++n) {
        b(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return b;
}

[[nodiscard]] inline FockOperator creation(int cutoff) { return annihilation(cutoff).adjoint(); }

[[nodiscard]] inline FockOperator number(int cutoff)
{
    require_cutoff(cutoff);
    FockOperator n = FockOperator::Zero(mode_dim(cutoff), mode_dim(cutoff));
    for (int k = 0; k <= cutoff; ++k) {
        n(k, k) = static_cast<double>(k);
    }
    return n;
}

/// b^dag + b
[[nodiscard]] inline FockOperator position_quadrature(int cutoff)
{
    const FockOperator b = annihilation(cutoff);
    return b + b.adjoint();
}

/// Kronecker product with the 2x2 ancilla operator on the left.
[[nodiscard]] inline FockOperator ancilla_kron(const Eigen::Matrix2cd& a, const FockOperator& m)
{
    const Eigen::Index d = m.rows();
    FockOperator out(2 * d, 2 * d);
    for (Eigen::Index r = 0; r < 2; ++r) {
        for (Eigen::Index c = 0; c < 2; ++c) {
            out.block(r * d, c * d, d, d) = a(r, c) * m;
        }
    }
    return out;
}

[[nodiscard]] inline FockOperator lift(const FockOperator& m) { return ancilla_kron(Eigen::Matrix2cd::Identity(), m); }

/// |+1><+1|_A (x) (b^dag + b)
[[nodiscard]] inline FockOperator build_heff(int cutoff)
{
    Eigen::Matrix2cd p = Eigen::Matrix2cd::Zero();
    p(1, 1) = 1.0;
    return ancilla_kron(p, position_quadrature(cutoff));
}

/// ceil((|alpha| + 3G + 6)^2) clipped to [32, 512].
[[nodiscard]] inline int default_cutoff(double alpha, double G)
{
    const double r = std::abs(alpha) + 3.0 * std::abs(G) + 6.0;
    return std::clamp(static_cast<int>(std::ceil(r * r)), 32, 512);
}

/// Population on number states n > cutoff - 5, per oscillator block.
[[nodiscard]] inline double tail_population(const FockVector& v, int cutoff)
{
    const Eigen::Index d = mode_dim(cutoff);
    if (v.size() % d != 0) {
        throw DimensionMismatch("vector length is not a multiple of cutoff + 1");
    }
    double tail = 0.0;
    for (Eigen::Index block = 0; block < v.size() / d; ++block) {
        for (Eigen::Index n = std::max<Eigen::Index>(0, cutoff - 4); n < d; ++n) {
            tail += std::norm(v(block * d + n));
        }
    }
    return tail;
}

inline constexpr double kTailFlag = 1e-8;

[[nodiscard]] inline bool cutoff_adequate(const FockVector& v, int cutoff)
{
    return tail_population(v, cutoff) < kTailFlag;
}

inline void check_dims(const FockOperator& op, Eigen::Index n)
{
    if (op.rows() != n || op.cols() != n) {
        throw DimensionMismatch("operator is " + std::to_string(op.rows()) + "x" + std::to_string(op.cols()) +
                                ", operand has dimension " + std::to_string(n));
    }
}

/// exp(-i H t) through the eigendecomposition of a Hermitian H, reusable for
/// several times.
class UnitaryPropagator {
public:
    explicit UnitaryPropagator(const FockOperator& H) : eig_(H) {}

    [[nodiscard]] Eigen::Index dim() const { return eig_.eigenvectors().rows(); }

    [[nodiscard]] FockOperator matrix(double time) const
    {
        const Eigen::VectorXcd phases = (Complex{0.0, -time} * eig_.eigenvalues().cast<Complex>()).array().exp();
        return eig_.eigenvectors() * phases.asDiagonal() * eig_.eigenvectors().adjoint();
    }

    [[nodiscard]] FockVector apply(const FockVector& v, double time) const
    {
        if (v.size() != dim()) {
            throw DimensionMismatch("vector dimension does not match propagator");
        }
        const Eigen::VectorXcd phases = (Complex{0.0, -time} * eig_.eigenvalues().cast<Complex>()).array().exp();
        return eig_.eigenvectors() * (phases.asDiagonal() * (eig_.eigenvectors().adjoint() * v));
    }

private:
    Eigen::SelfAdjointEigenSolver<FockOperator> eig_;
};

[[nodiscard]] inline FockVector evolve_unitary(const FockVector& v, const FockOperator& H, double time)
{
    check_dims(H, v.size());
    return UnitaryPropagator(H).apply(v, time);
}

/// (c_-|-1> + c_+|+1>) (x) m
[[nodiscard]] inline FockVector hybrid_vector(Complex c_minus, Complex c_plus, const FockVector& m)
{
    FockVector v(2 * m.size());
    v.head(m.size()) = c_minus * m;
    v.tail(m.size()) = c_plus * m;
    return v;
}

/// <+_x|_A v, left unnormalized.
[[nodiscard]] inline FockVector project_plus_x(const FockVector& v)
{
    if (v.size() % 2 != 0) {
        throw DimensionMismatch("hybrid vector must have even length");
    }
    const Eigen::Index d = v.size() / 2;
    return (v.head(d) + v.tail(d)) / std::numbers::sqrt2;
}

/// <+_x| rho |+_x> on the oscillator, left unnormalized.
[[nodiscard]] inline DensityMatrix project_plus_x(const DensityMatrix& rho)
{
    if (rho.rows() % 2 != 0 || rho.rows() != rho.cols()) {
        throw DimensionMismatch("hybrid density matrix must be square with even dimension");
    }
    const Eigen::Index d = rho.rows() / 2;
    return 0.5 * (rho.block(0, 0, d, d) + rho.block(0, d, d, d) + rho.block(d, 0, d, d) + rho.block(d, d, d, d));
}

[[nodiscard]] inline DensityMatrix trace_out_ancilla(const DensityMatrix& rho)
{
    const Eigen::Index d = rho.rows() / 2;
    return rho.block(0, 0, d, d) + rho.block(d, d, d, d);
}

[[nodiscard]] inline Eigen::Matrix2cd trace_out_oscillator(const DensityMatrix& rho)
{
    const Eigen::Index d = rho.rows() / 2;
    Eigen::Matrix2cd a;
    for (Eigen::Index r = 0; r < 2; ++r) {
        for (Eigen::Index c = 0; c < 2; ++c) {
            a(r, c) = rho.block(r * d, c * d, d, d).trace();
        }
    }
    return a;
}

[[nodiscard]] inline DensityMatrix projector(const FockVector& v) { return v * v.adjoint(); }

/// <t| rho |t> for a normalised rho.
[[nodiscard]] inline double expectation(const DensityMatrix& rho, const FockVector& t)
{
    return t.dot(rho * t).real();
}

/// 1/2 sum |eigenvalues of (a - b)|
[[nodiscard]] inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b)
{
    const DensityMatrix d = 0.5 * ((a - b) + (a - b).adjoint());
    const Eigen::SelfAdjointEigenSolver<DensityMatrix> eig(d, Eigen::EigenvaluesOnly);
    return 0.5 * eig.eigenvalues().cwiseAbs().sum();
}

[[nodiscard]] inline double min_eigenvalue(const DensityMatrix& rho)
{
    const DensityMatrix h = 0.5 * (rho + rho.adjoint());
    return Eigen::SelfAdjointEigenSolver<DensityMatrix>(h, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

/// Fixed-step RK4 for d rho/dt = -i[H, rho] + kappa/2 (2 L rho L^dag - L^dag L rho - rho L^dag L).
/// The step is shortened to land exactly on t_final.
[[nodiscard]] inline DensityMatrix lindblad_integrate(const DensityMatrix& rho0, const FockOperator& H,
                                                      const FockOperator& L, double kappa, double t_final, double dt)
{
    if (rho0.rows() != rho0.cols()) {
        throw DimensionMismatch("density matrix must be square");
    }
    check_dims(H, rho0.rows());
    check_dims(L, rho0.rows());
    if (!(dt > 0.0) || !(t_final >= 0.0) || !(kappa >= 0.0)) {
        throw InvalidArgument("need dt > 0, t_final >= 0, kappa >= 0");
    }

    using Sparse = Eigen::SparseMatrix<Complex>;
    const Sparse h = H.sparseView();
    const Sparse l = L.sparseView();
    const Sparse ld = Sparse(l.adjoint());
    const Sparse ldl = ld * l;

    // Explicit RK4 stability for the largest Liouvillian frequency.
    const Eigen::SelfAdjointEigenSolver<FockOperator> spec(H, Eigen::EigenvaluesOnly);
    const double spread = spec.eigenvalues().maxCoeff() - spec.eigenvalues().minCoeff();
    const double damping = kappa * FockOperator(ldl).diagonal().real().maxCoeff();
    if (dt * (spread + damping) > 2.5) {
        throw StepTooLarge("dt = " + std::to_string(dt) + " exceeds the RK4 stability range for this generator");
    }

    auto rhs = [&](const DensityMatrix& r) -> DensityMatrix {
        const DensityMatrix hr = h * r;
        DensityMatrix out = Complex{0.0, -1.0} * (hr - hr.adjoint());
        if (kappa > 0.0) {
            const DensityMatrix nr = ldl * r;
            const DensityMatrix lr = l * r;
            out += (0.5 * kappa) * (2.0 * DensityMatrix(lr * ld) - nr - nr.adjoint());
        }
        return out;
    };

    DensityMatrix rho = rho0;
    const auto steps = static_cast<long>(std::ceil(t_final / dt - 1e-9));
    const double h_step = steps > 0 ? t_final / static_cast<double>(steps) : 0.0;
    const double scale = std::max(1.0, rho0.norm());
    for (long s = 0; s < steps; ++s) {
        const Complex tr_before = rho.trace();
        const DensityMatrix k1 = rhs(rho);
        const DensityMatrix k2 = rhs(rho + 0.5 * h_step * k1);
        const DensityMatrix k3 = rhs(rho + 0.5 * h_step * k2);
        const DensityMatrix k4 = rhs(rho + h_step * k3);
        rho += (h_step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        rho = (0.5 * (rho + rho.adjoint())).eval();
        if (std::abs(rho.trace() - tr_before) > 1e-10 || !(rho.norm() < 10.0 * scale)) {
            throw StepTooLarge("trace drift or norm growth in Lindblad step " + std::to_string(s));
        }
    }
    return rho;
}

/// Master equation on the ancilla (x) oscillator space with damping of the oscillator.
[[nodiscard]] inline DensityMatrix lindblad_integrate(const DensityMatrix& rho0, const FockOperator& H, double kappa,
                                                      double t_final, double dt)
{
    if (rho0.rows() % 2 != 0) {
        throw DimensionMismatch("hybrid density matrix must have even dimension");
    }
    const int cutoff = static_cast<int>(rho0.rows() / 2 - 1);
    return lindblad_integrate(rho0, H, lift(annihilation(cutoff)), kappa, t_final, dt);
}

}  // namespace hybridlg::fock
