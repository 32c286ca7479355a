#pragma once

// Closed-form algebra of finite superpositions of coherent states of a single
// oscillator mode. Everything here is exact: overlaps, norms (through the Gram
// matrix), momentum displacements with their BCH phases, and the updates
// produced by the POVM {|t><t|, I - |t><t|}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "hybridlg/errors.hpp"
#include "hybridlg/types.hpp"

namespace hybridlg {

/// Complex amplitude labelling a coherent state |value>.
class CoherentLabel {
public:
    CoherentLabel() = default;
    explicit CoherentLabel(Complex value) : value_(value)
    {
        if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
            throw InvalidArgument("coherent label must be finite");
        }
    }
    explicit CoherentLabel(double re, double im = 0.0) : CoherentLabel(Complex{re, im}) {}

    [[nodiscard]] Complex value() const noexcept { return value_; }
    [[nodiscard]] double modulus() const noexcept { return std::abs(value_); }

    friend bool operator==(const CoherentLabel&, const CoherentLabel&) = default;

private:
    Complex value_{0.0, 0.0};
};

/// <a|b> = exp(-|a|^2/2 - |b|^2/2 + conj(a) b)
[[nodiscard]] inline Complex overlap(CoherentLabel a, CoherentLabel b) noexcept
{
    const Complex x = a.value();
    const Complex y = b.value();
    return std::exp(-0.5 * std::norm(x) - 0.5 * std::norm(y) + std::conj(x) * y);
}

struct CoherentComponent {
    Complex weight;
    CoherentLabel label;
};

class CoherentSuperposition {
public:
    /// Labels closer than this (in modulus) are treated as the same state.
    static constexpr double kMergeTolerance = 1e-12;

    explicit CoherentSuperposition(CoherentLabel label, Complex weight = 1.0)
        : components_{{weight, label}}, normalized_(std::abs(std::abs(weight) - 1.0) < 1e-15)
    {
    }

    /// Builds a superposition, merging components whose labels coincide.
    static CoherentSuperposition from_components(std::span<const CoherentComponent> parts)
    {
        if (parts.empty()) {
            throw InvalidArgument("coherent superposition needs at least one component");
        }
        CoherentSuperposition out(parts.front().label, parts.front().weight);
        out.normalized_ = false;
        for (std::size_t k = 1; k < parts.size(); ++k) {
            out.accumulate(parts[k]);
        }
        out.drop_zero_weights();
        return out;
    }
    static CoherentSuperposition from_components(std::initializer_list<CoherentComponent> parts)
    {
        return from_components(std::span<const CoherentComponent>(parts.begin(), parts.size()));
    }

    [[nodiscard]] std::span<const CoherentComponent> components() const noexcept { return components_; }
    [[nodiscard]] std::size_t size() const noexcept { return components_.size(); }
    [[nodiscard]] bool normalized() const noexcept { return normalized_; }

    /// Weight attached to `label`, or zero when the label is absent.
    [[nodiscard]] Complex weight_of(CoherentLabel label) const noexcept
    {
        for (const auto& c : components_) {
            if (std::abs(c.label.value() - label.value()) < kMergeTolerance) {
                return c.weight;
            }
        }
        return 0.0;
    }

    [[nodiscard]] double max_label_modulus() const noexcept
    {
        double r = 0.0;
        for (const auto& c : components_) {
            r = std::max(r, c.label.modulus());
        }
        return r;
    }

    friend CoherentSuperposition operator*(Complex factor, const CoherentSuperposition& s)
    {
        CoherentSuperposition out = s;
        for (auto& c : out.components_) {
            c.weight *= factor;
        }
        out.normalized_ = s.normalized_ && std::abs(std::abs(factor) - 1.0) < 1e-15;
        return out;
    }

    friend CoherentSuperposition operator+(const CoherentSuperposition& a, const CoherentSuperposition& b)
    {
        CoherentSuperposition out = a;
        out.normalized_ = false;
        for (const auto& c : b.components_) {
            out.accumulate(c);
        }
        out.drop_zero_weights();
        return out;
    }

    friend CoherentSuperposition operator-(const CoherentSuperposition& a, const CoherentSuperposition& b)
    {
        return a + Complex{-1.0, 0.0} * b;
    }

    /// Marks the state as normalized; only called by operations that guarantee it.
    void assume_normalized(bool flag) noexcept { normalized_ = flag; }

private:
    void accumulate(const CoherentComponent& part)
    {
        for (auto& c : components_) {
            if (std::abs(c.label.value() - part.label.value()) < kMergeTolerance) {
                c.weight += part.weight;
                return;
            }
        }
        components_.push_back(part);
    }

    void drop_zero_weights()
    {
        if (components_.size() < 2) {
            return;
        }
        std::erase_if(components_, [](const CoherentComponent& c) { return c.weight == Complex{0.0, 0.0}; });
        if (components_.empty()) {
            components_.push_back({0.0, CoherentLabel{}});
        }
    }

    std::vector<CoherentComponent> components_;
    bool normalized_ = false;
};

[[nodiscard]] inline Eigen::MatrixXcd gram_matrix(std::span<const CoherentLabel> labels)
{
    const auto n = static_cast<Eigen::Index>(labels.size());
    Eigen::MatrixXcd g(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
            g(j, k) = overlap(labels[static_cast<std::size_t>(j)], labels[static_cast<std::size_t>(k)]);
        }
    }
    return g;
}

/// <a|b> for two superpositions.
[[nodiscard]] inline Complex inner(const CoherentSuperposition& a, const CoherentSuperposition& b) noexcept
{
    Complex sum{0.0, 0.0};
    for (const auto& x : a.components()) {
        for (const auto& y : b.components()) {
            sum += std::conj(x.weight) * y.weight * overlap(x.label, y.label);
        }
    }
    return sum;
}

/// <label|s>
[[nodiscard]] inline Complex inner(CoherentLabel label, const CoherentSuperposition& s) noexcept
{
    Complex sum{0.0, 0.0};
    for (const auto& y : s.components()) {
        sum += y.weight * overlap(label, y.label);
    }
    return sum;
}

/// w^dagger G w over the component labels. The imaginary residue is dropped.
[[nodiscard]] inline double norm_squared(const CoherentSuperposition& s)
{
    std::vector<CoherentLabel> labels;
    Eigen::VectorXcd w(static_cast<Eigen::Index>(s.size()));
    Eigen::Index k = 0;
    for (const auto& c : s.components()) {
        labels.push_back(c.label);
        w(k++) = c.weight;
    }
    const Complex q = w.dot(gram_matrix(labels) * w);
    return std::max(0.0, q.real());
}

inline constexpr double kDegenerateNorm = 1e-14;

[[nodiscard]] inline CoherentSuperposition normalize(const CoherentSuperposition& s)
{
    const double n2 = norm_squared(s);
    if (!(n2 > kDegenerateNorm)) {
        throw DegenerateState("cannot normalize a state of squared norm " + std::to_string(n2));
    }
    CoherentSuperposition out = Complex{1.0 / std::sqrt(n2), 0.0} * s;
    out.assume_normalized(true);
    return out;
}

/// Applies D(-i mu) = exp[-i mu (b^dag + b)]: (w, c) -> (w e^{-i mu Re c}, c - i mu).
[[nodiscard]] inline CoherentSuperposition displace_momentum(const CoherentSuperposition& s, double mu)
{
    std::vector<CoherentComponent> parts;
    parts.reserve(s.size());
    for (const auto& c : s.components()) {
        const Complex z = c.label.value();
        parts.push_back({c.weight * std::exp(Complex{0.0, -mu * z.real()}), CoherentLabel{z - kI * mu}});
    }
    CoherentSuperposition out = CoherentSuperposition::from_components(parts);
    out.assume_normalized(s.normalized());
    return out;
}

struct PovmResult {
    double probability;
    CoherentSuperposition post;
};

/// Outcome of the POVM element |target><target|.
[[nodiscard]] inline PovmResult povm_plus(const CoherentSuperposition& s, CoherentLabel target)
{
    const double n2 = s.normalized() ? 1.0 : norm_squared(s);
    const double p = std::clamp(std::norm(inner(target, s)) / n2, 0.0, 1.0);
    CoherentSuperposition post(target);
    post.assume_normalized(true);
    return {p, post};
}

/// Outcome of the POVM element I - |target><target|.
[[nodiscard]] inline PovmResult povm_minus(const CoherentSuperposition& s, CoherentLabel target)
{
    const CoherentSuperposition unit = s.normalized() ? s : normalize(s);
    const Complex amp = inner(target, unit);
    const double p = std::clamp(1.0 - std::norm(amp), 0.0, 1.0);
    if (p < kDegenerateNorm) {
        throw DegenerateState("outcome I - |t><t| has vanishing probability");
    }
    const CoherentSuperposition rest = unit - amp * CoherentSuperposition(target);
    return {p, normalize(rest)};
}

/// Poisson tail sum_{n > cutoff} e^{-m} m^n / n!.
[[nodiscard]] inline double poisson_tail(double mean, int cutoff)
{
    if (mean <= 0.0) {
        return 0.0;
    }
    const double log_mean = std::log(mean);
    double tail = 0.0;
    for (int n = cutoff + 1;; ++n) {
        const double term = std::exp(-mean + n * log_mean - std::lgamma(n + 1.0));
        tail += term;
        if (n > mean && term < 1e-22) {
            break;
        }
    }
    return tail;
}

inline constexpr double kFockTailBound = 1e-10;

/// Smallest cutoff N with a number-basis tail beyond N below 1e-10 for a
/// coherent state of modulus `radius`.
[[nodiscard]] inline int coherent_cutoff(double radius)
{
    const double mean = radius * radius;
    int n = std::max(0, static_cast<int>(mean) - 1);
    while (poisson_tail(mean, n) >= kFockTailBound) {
        ++n;
    }
    return n;
}

[[nodiscard]] inline int coherent_cutoff(const CoherentSuperposition& s)
{
    return coherent_cutoff(s.max_label_modulus());
}

/// Number-basis amplitudes e^{-|a|^2/2} a^n / sqrt(n!) for n = 0..cutoff.
[[nodiscard]] inline FockVector coherent_fock(CoherentLabel label, int cutoff)
{
    if (cutoff < 0) {
        throw InvalidArgument("cutoff must be non-negative");
    }
    const Complex a = label.value();
    FockVector v(cutoff + 1);
    Complex c = std::exp(-0.5 * std::norm(a));
    v(0) = c;
    for (int n = 1; n <= cutoff; ++n) {
        c *= a / std::sqrt(static_cast<double>(n));
        v(n) = c;
    }
    return v;
}

[[nodiscard]] inline FockVector to_fock(const CoherentSuperposition& s, int cutoff)
{
    for (const auto& c : s.components()) {
        const double tail = poisson_tail(std::norm(c.label.value()), cutoff);
        if (tail >= kFockTailBound) {
            throw CutoffTooSmall("cutoff " + std::to_string(cutoff) + " leaves tail population " +
                                 std::to_string(tail) + " for |label| = " + std::to_string(c.label.modulus()));
        }
    }
    FockVector v = FockVector::Zero(cutoff + 1);
    for (const auto& c : s.components()) {
        v += c.weight * coherent_fock(c.label, cutoff);
    }
    return v;
}

}  // namespace hybridlg
