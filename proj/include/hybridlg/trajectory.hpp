#pragma once

// Monte-Carlo wave-function unravelling of the damped master equation with a
// single jump operator sqrt(kappa) L. Per step: dp = dt kappa <L^dag L>; with
// probability dp the state jumps to L phi, otherwise it is propagated with the
// non-Hermitian H_QU = H - i kappa/2 L^dag L. The state is renormalised after
// every step.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

#include "hybridlg/errors.hpp"
#include "hybridlg/fock.hpp"
#include "hybridlg/types.hpp"

namespace hybridlg::mcwf {

enum class Stepper {
    euler,        // I - i H_QU dt
    exponential,  // exp(-i H_QU dt)
};

[[nodiscard]] inline std::string to_string(Stepper s) { return s == Stepper::euler ? "euler" : "exponential"; }

[[nodiscard]] inline Stepper stepper_from_string(const std::string& s)
{
    if (s == "euler") {
        return Stepper::euler;
    }
    if (s == "exponential") {
        return Stepper::exponential;
    }
    throw InvalidArgument("unknown stepper '" + s + "' (expected euler or exponential)");
}

inline constexpr double kMaxJumpProbability = 0.05;

/// Default step of the exponential stepper; its error is only in the jump
/// timing, so it tolerates a much coarser grid than the first-order step.
inline constexpr double kExponentialDefaultDt = 0.01;

struct TrajectoryConfig {
    double kappa_over_eta = 1e-3;
    double dt = 1e-3;
    int n_trajectories = 2000;
    std::uint64_t seed = 0;
    int cutoff = 32;
    Stepper stepper = Stepper::euler;
    unsigned threads = 1;

    /// Checks the first-order validity bound for states with <b^dag b> up to max_occupation.
    void validate(double max_occupation = 0.0) const
    {
        if (!(kappa_over_eta >= 0.0) || !std::isfinite(kappa_over_eta)) {
            throw InvalidArgument("kappa/eta must be finite and non-negative");
        }
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw InvalidArgument("dt must be positive");
        }
        if (n_trajectories < 1) {
            throw InvalidArgument("n_trajectories must be at least 1");
        }
        if (cutoff < 1) {
            throw InvalidArgument("cutoff must be at least 1");
        }
        if (dt * kappa_over_eta * max_occupation >= kMaxJumpProbability) {
            throw StepTooLarge("dt * kappa * <n> = " + std::to_string(dt * kappa_over_eta * max_occupation) +
                               " is not below " + std::to_string(kMaxJumpProbability));
        }
    }
};

/// dt = min(1e-3 / max(1, kappa <n>_max), 1e-3 G)
[[nodiscard]] inline double default_dt(double kappa, double max_occupation, double G)
{
    const double base = 1e-3 / std::max(1.0, kappa * max_occupation);
    return G > 0.0 ? std::min(base, 1e-3 * G) : base;
}

struct TrajectoryRecord {
    FockVector final_state;
    std::vector<double> jump_times;
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
};

/// Hamiltonian, jump operator and rate.
class Model {
public:
    using Sparse = Eigen::SparseMatrix<Complex>;

    Model(const FockOperator& H, const FockOperator& L, double kappa) : H_(H), L_(L), kappa_(kappa)
    {
        fock::check_dims(L, H.rows());
        if (!(kappa >= 0.0)) {
            throw InvalidArgument("kappa must be non-negative");
        }
        const FockOperator n = L.adjoint() * L;
        hqu_ = H - Complex{0.0, 0.5 * kappa} * n;
        l_ = L.sparseView();
        n_ = n.sparseView();
        hqu_sparse_ = hqu_.sparseView();
    }

    /// H_eff with b damped, on the ancilla (x) oscillator space.
    static Model hybrid(int cutoff, double kappa)
    {
        return {fock::build_heff(cutoff), fock::lift(fock::annihilation(cutoff)), kappa};
    }

    [[nodiscard]] Eigen::Index dim() const { return H_.rows(); }
    [[nodiscard]] double kappa() const { return kappa_; }
    [[nodiscard]] const FockOperator& hamiltonian() const { return H_; }
    [[nodiscard]] const FockOperator& jump() const { return L_; }
    [[nodiscard]] const FockOperator& effective() const { return hqu_; }
    [[nodiscard]] const Sparse& jump_sparse() const { return l_; }
    [[nodiscard]] const Sparse& number_sparse() const { return n_; }
    [[nodiscard]] const Sparse& effective_sparse() const { return hqu_sparse_; }

    [[nodiscard]] double occupation(const FockVector& v) const { return v.dot(n_ * v).real(); }

private:
    FockOperator H_;
    FockOperator L_;
    double kappa_;
    FockOperator hqu_;
    Sparse l_;
    Sparse n_;
    Sparse hqu_sparse_;
};

/// One-step propagator for a fixed step length.
class StepKernel {
public:
    StepKernel(const Model& model, double h, Stepper stepper) : model_(&model), h_(h), stepper_(stepper)
    {
        if (!(h > 0.0)) {
            throw InvalidArgument("step must be positive");
        }
        if (stepper == Stepper::exponential) {
            const FockOperator u = (Complex{0.0, -h} * model.effective()).exp();
            // Block-diagonal generators give exact zeros off the blocks.
            propagator_ = u.sparseView(1.0, 1e-300);
        }
    }

    [[nodiscard]] const Model& model() const { return *model_; }
    [[nodiscard]] double step() const { return h_; }
    [[nodiscard]] Stepper stepper() const { return stepper_; }

    [[nodiscard]] double jump_probability(const FockVector& v) const
    {
        return h_ * model_->kappa() * model_->occupation(v);
    }

    /// No-jump branch, renormalised.
    [[nodiscard]] FockVector drift(const FockVector& v) const
    {
        FockVector out = stepper_ == Stepper::euler
                             ? FockVector(v - Complex{0.0, h_} * (model_->effective_sparse() * v))
                             : FockVector(propagator_ * v);
        return normalized(out);
    }

    /// Jump branch, renormalised.
    [[nodiscard]] FockVector jump(const FockVector& v) const
    {
        return normalized(FockVector(model_->jump_sparse() * v));
    }

    struct Outcome {
        FockVector state;
        bool jumped;
    };

    /// Advances by one step given a uniform draw in [0, 1).
    [[nodiscard]] Outcome advance(const FockVector& v, double u) const
    {
        const double dp = jump_probability(v);
        if (dp >= kMaxJumpProbability) {
            throw StepTooLarge("jump probability " + std::to_string(dp) + " per step is too large");
        }
        if (u < dp) {
            return {jump(v), true};
        }
        return {drift(v), false};
    }

private:
    static FockVector normalized(const FockVector& v)
    {
        const double n = v.norm();
        if (!(n * n > 1e-14)) {
            throw DegenerateState("trajectory state lost its norm");
        }
        return v / n;
    }

    const Model* model_;
    double h_;
    Stepper stepper_;
    Model::Sparse propagator_;
};

/// Per-trajectory generator keyed by (seed, index, stream); independent of
/// execution order.
class TrajectoryRng {
public:
    TrajectoryRng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream = 0)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        gen_.seed(seq);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 gen_;
};

[[nodiscard]] inline Model model_for(const TrajectoryConfig& cfg) { return Model::hybrid(cfg.cutoff, cfg.kappa_over_eta); }

/// Single step with the effective Hamiltonian of the hybrid system.
[[nodiscard]] inline FockVector mcwf_step(const FockVector& v, const TrajectoryConfig& cfg, TrajectoryRng& rng)
{
    const Model model = model_for(cfg);
    fock::check_dims(model.hamiltonian(), v.size());
    return StepKernel(model, cfg.dt, cfg.stepper).advance(v, rng.uniform()).state;
}

[[nodiscard]] inline long step_count(double t_final, double dt)
{
    if (!(t_final > 0.0)) {
        throw InvalidArgument("t_final must be positive");
    }
    return std::max(1L, static_cast<long>(std::ceil(t_final / dt - 1e-9)));
}

[[nodiscard]] inline TrajectoryRecord run_trajectory(const FockVector& initial, const StepKernel& kernel, long steps,
                                                     std::uint64_t seed, std::uint64_t index,
                                                     std::uint64_t stream = 0)
{
    TrajectoryRng rng(seed, index, stream);
    TrajectoryRecord rec{initial.normalized(), {}, seed, index};
    for (long s = 0; s < steps; ++s) {
        auto out = kernel.advance(rec.final_state, rng.uniform());
        rec.final_state = std::move(out.state);
        if (out.jumped) {
            rec.jump_times.push_back(static_cast<double>(s + 1) * kernel.step());
        }
    }
    return rec;
}

[[nodiscard]] inline TrajectoryRecord run_trajectory(const FockVector& initial, const Model& model,
                                                     const TrajectoryConfig& cfg, double t_final,
                                                     std::uint64_t traj_index, std::uint64_t stream = 0)
{
    fock::check_dims(model.hamiltonian(), initial.size());
    const long steps = step_count(t_final, cfg.dt);
    const StepKernel kernel(model, t_final / static_cast<double>(steps), cfg.stepper);
    return run_trajectory(initial, kernel, steps, cfg.seed, traj_index, stream);
}

[[nodiscard]] inline TrajectoryRecord run_trajectory(const FockVector& initial, const TrajectoryConfig& cfg,
                                                     double t_final, std::uint64_t traj_index)
{
    return run_trajectory(initial, model_for(cfg), cfg, t_final, traj_index);
}

/// Deterministic no-jump path shared by all trajectories with the same
/// initial state. A trajectory follows it until its first jump, which yields
/// bit-identical results to stepping it on its own.
class NoJumpPath {
public:
    NoJumpPath(const StepKernel& kernel, const FockVector& initial, long steps) : kernel_(&kernel)
    {
        states_.reserve(static_cast<std::size_t>(steps) + 1);
        probs_.reserve(static_cast<std::size_t>(steps));
        states_.push_back(initial.normalized());
        for (long s = 0; s < steps; ++s) {
            const double dp = kernel.jump_probability(states_.back());
            if (dp >= kMaxJumpProbability) {
                throw StepTooLarge("jump probability " + std::to_string(dp) + " per step is too large");
            }
            probs_.push_back(dp);
            states_.push_back(kernel.drift(states_.back()));
        }
    }

    [[nodiscard]] long steps() const { return static_cast<long>(probs_.size()); }
    [[nodiscard]] const FockVector& state(long s) const { return states_[static_cast<std::size_t>(s)]; }
    [[nodiscard]] double jump_probability(long s) const { return probs_[static_cast<std::size_t>(s)]; }
    [[nodiscard]] const FockVector& final_state() const { return states_.back(); }

    /// Runs one trajectory; `jump_free` is set when it never leaves the path.
    [[nodiscard]] TrajectoryRecord run(std::uint64_t seed, std::uint64_t index, std::uint64_t stream,
                                       bool* jump_free = nullptr) const
    {
        TrajectoryRng rng(seed, index, stream);
        TrajectoryRecord rec{{}, {}, seed, index};
        const long steps = this->steps();
        long s = 0;
        for (; s < steps; ++s) {
            if (rng.uniform() < probs_[static_cast<std::size_t>(s)]) {
                break;
            }
        }
        if (jump_free != nullptr) {
            *jump_free = s == steps;
        }
        if (s == steps) {
            rec.final_state = final_state();
            return rec;
        }
        rec.final_state = kernel_->jump(state(s));
        rec.jump_times.push_back(static_cast<double>(s + 1) * kernel_->step());
        for (++s; s < steps; ++s) {
            auto out = kernel_->advance(rec.final_state, rng.uniform());
            rec.final_state = std::move(out.state);
            if (out.jumped) {
                rec.jump_times.push_back(static_cast<double>(s + 1) * kernel_->step());
            }
        }
        return rec;
    }

private:
    const StepKernel* kernel_;
    std::vector<FockVector> states_;
    std::vector<double> probs_;
};

/// Runs `count` trajectories with indices first_index, first_index + 1, ...
/// Records come back in index order whatever the thread count.
[[nodiscard]] inline std::vector<TrajectoryRecord> run_ensemble(const FockVector& initial, const Model& model,
                                                                const TrajectoryConfig& cfg, double t_final,
                                                                std::uint64_t stream = 0,
                                                                std::uint64_t first_index = 0)
{
    cfg.validate();
    fock::check_dims(model.hamiltonian(), initial.size());
    const long steps = step_count(t_final, cfg.dt);
    const StepKernel kernel(model, t_final / static_cast<double>(steps), cfg.stepper);
    const NoJumpPath path(kernel, initial, steps);
    std::vector<TrajectoryRecord> records(static_cast<std::size_t>(cfg.n_trajectories));
    const unsigned workers = std::max(1U, std::min<unsigned>(cfg.threads, records.size()));
    auto work = [&](unsigned w) {
        for (std::size_t k = w; k < records.size(); k += workers) {
            records[k] = path.run(cfg.seed, first_index + k, stream);
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(work, w);
        }
    }
    return records;
}

[[nodiscard]] inline DensityMatrix ensemble_average(const std::vector<TrajectoryRecord>& records)
{
    if (records.empty()) {
        throw EmptyEnsemble("cannot average an empty ensemble");
    }
    const Eigen::Index d = records.front().final_state.size();
    DensityMatrix rho = DensityMatrix::Zero(d, d);
    for (const auto& r : records) {
        if (r.final_state.size() != d) {
            throw DimensionMismatch("trajectory records have different dimensions");
        }
        rho.noalias() += r.final_state * r.final_state.adjoint();
    }
    return rho / static_cast<double>(records.size());
}

/// Weighted pure states standing for an ensemble average, with identical
/// jump-free trajectories merged into one entry.
struct WeightedEnsemble {
    std::vector<double> weights;
    std::vector<FockVector> states;
    long trajectories = 0;
    long jumped = 0;

    void add(double w, FockVector v)
    {
        weights.push_back(w);
        states.push_back(std::move(v));
    }

    /// Sum of w |v><v| after applying `map` to every state.
    template <class Map>
    [[nodiscard]] DensityMatrix density(Map&& map) const
    {
        if (states.empty()) {
            throw EmptyEnsemble("cannot average an empty ensemble");
        }
        FockVector first = map(states.front());
        DensityMatrix rho = DensityMatrix::Zero(first.size(), first.size());
        for (std::size_t k = 0; k < states.size(); ++k) {
            const FockVector v = k == 0 ? first : map(states[k]);
            rho.noalias() += weights[k] * (v * v.adjoint());
        }
        return rho;
    }

    [[nodiscard]] DensityMatrix density() const
    {
        return density([](const FockVector& v) { return v; });
    }
};

/// Ensemble of `count` trajectories reduced on the fly, each with weight `weight`.
inline void accumulate_ensemble(WeightedEnsemble& out, const FockVector& initial, const StepKernel& kernel,
                                long steps, long count, double weight, std::uint64_t seed, std::uint64_t stream,
                                std::uint64_t first_index, unsigned threads)
{
    const NoJumpPath path(kernel, initial, steps);
    const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    std::vector<std::vector<std::pair<std::uint64_t, FockVector>>> jumped(workers);
    std::vector<long> free_count(workers, 0);
    auto work = [&](unsigned w) {
        for (long k = w; k < count; k += workers) {
            bool jump_free = false;
            TrajectoryRecord rec = path.run(seed, first_index + static_cast<std::uint64_t>(k), stream, &jump_free);
            if (jump_free) {
                ++free_count[w];
            } else {
                jumped[w].emplace_back(static_cast<std::uint64_t>(k), std::move(rec.final_state));
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(work, w);
        }
    }
    // Deterministic merge in trajectory-index order.
    std::vector<std::pair<std::uint64_t, FockVector>> all;
    long n_free = 0;
    for (unsigned w = 0; w < workers; ++w) {
        n_free += free_count[w];
        for (auto& j : jumped[w]) {
            all.push_back(std::move(j));
        }
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    if (n_free > 0) {
        out.add(weight * static_cast<double>(n_free), path.final_state());
    }
    for (auto& j : all) {
        out.add(weight, std::move(j.second));
    }
    out.trajectories += count;
    out.jumped += static_cast<long>(all.size());
}

/// Unravels the mixed input sum_k p_k |v_k><v_k| by allocating
/// max(1, round(N p_k)) trajectories to every component with p_k > 1e-10.
[[nodiscard]] inline WeightedEnsemble run_mixed_ensemble(const std::vector<double>& probabilities,
                                                         const std::vector<FockVector>& components,
                                                         const Model& model, const TrajectoryConfig& cfg,
                                                         double t_final, std::uint64_t stream)
{
    cfg.validate();
    if (probabilities.size() != components.size() || components.empty()) {
        throw InvalidArgument("mixed ensemble needs matching, non-empty probability and state lists");
    }
    const long steps = step_count(t_final, cfg.dt);
    const StepKernel kernel(model, t_final / static_cast<double>(steps), cfg.stepper);
    double total = 0.0;
    for (double p : probabilities) {
        total += std::max(0.0, p);
    }
    WeightedEnsemble out;
    std::uint64_t next_index = 0;
    for (std::size_t k = 0; k < components.size(); ++k) {
        const double p = std::max(0.0, probabilities[k]) / total;
        if (p <= 1e-10) {
            continue;
        }
        fock::check_dims(model.hamiltonian(), components[k].size());
        const long n = std::max(1L, std::lround(p * cfg.n_trajectories));
        accumulate_ensemble(out, components[k], kernel, steps, n, p / static_cast<double>(n), cfg.seed, stream,
                            next_index, cfg.threads);
        next_index += static_cast<std::uint64_t>(n);
    }
    return out;
}

}  // namespace hybridlg::mcwf
