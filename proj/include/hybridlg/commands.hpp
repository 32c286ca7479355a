#pragma once

// Sweeps behind the command-line subcommands. Each returns a ResultTable that
// the front end writes as CSV with a '#'-prefixed key=value header.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hybridlg/coherent.hpp"
#include "hybridlg/fock.hpp"
#include "hybridlg/fock_protocol.hpp"
#include "hybridlg/open_protocol.hpp"
#include "hybridlg/protocol.hpp"
#include "hybridlg/spin.hpp"
#include "hybridlg/sweep.hpp"

#ifndef HYBRIDLG_VERSION
#define HYBRIDLG_VERSION "0.0.0"
#endif

namespace hybridlg::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = HYBRIDLG_VERSION;

[[nodiscard]] inline std::string format_number(double x)
{
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return {buf.data(), res.ptr};
}

class ResultTable {
public:
    explicit ResultTable(std::vector<std::string> headers) : headers_(std::move(headers))
    {
        std::set<std::string> seen;
        for (const auto& h : headers_) {
            if (!seen.insert(h).second) {
                throw InvalidArgument("duplicate column header '" + h + "'");
            }
        }
    }

    void add_row(std::vector<double> row)
    {
        if (row.size() != headers_.size()) {
            throw DimensionMismatch("row has " + std::to_string(row.size()) + " values, table has " +
                                    std::to_string(headers_.size()) + " columns");
        }
        rows_.push_back(std::move(row));
    }

    void add_meta(std::string key, std::string value) { meta_.emplace_back(std::move(key), std::move(value)); }
    void add_meta(std::string key, double value) { add_meta(std::move(key), format_number(value)); }

    [[nodiscard]] const std::vector<std::string>& headers() const { return headers_; }
    [[nodiscard]] const std::vector<std::vector<double>>& rows() const { return rows_; }
    [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& metadata() const { return meta_; }

    [[nodiscard]] std::size_t column(const std::string& name) const
    {
        for (std::size_t k = 0; k < headers_.size(); ++k) {
            if (headers_[k] == name) {
                return k;
            }
        }
        throw InvalidArgument("no column '" + name + "'");
    }

    [[nodiscard]] std::vector<double> column_values(const std::string& name) const
    {
        const std::size_t c = column(name);
        std::vector<double> out;
        out.reserve(rows_.size());
        for (const auto& r : rows_) {
            out.push_back(r[c]);
        }
        return out;
    }

    [[nodiscard]] std::string meta(const std::string& key) const
    {
        for (const auto& [k, v] : meta_) {
            if (k == key) {
                return v;
            }
        }
        throw InvalidArgument("no metadata key '" + key + "'");
    }

    void write_csv(std::ostream& os) const
    {
        for (const auto& [k, v] : meta_) {
            os << "# " << k << '=' << v << '\n';
        }
        for (std::size_t k = 0; k < headers_.size(); ++k) {
            os << (k ? "," : "") << headers_[k];
        }
        os << '\n';
        for (const auto& r : rows_) {
            for (std::size_t k = 0; k < r.size(); ++k) {
                os << (k ? "," : "") << format_number(r[k]);
            }
            os << '\n';
        }
    }

private:
    std::vector<std::string> headers_;
    std::vector<std::vector<double>> rows_;
    std::vector<std::pair<std::string, std::string>> meta_;
};

struct RunConfig {
    std::string command;
    std::string out = "-";
    std::uint64_t seed = 0;
    unsigned threads = 1;

    spin::Grid dtau{0.0, 0.5 * std::numbers::pi, std::numbers::pi / 800.0};
    spin::Grid g_grid{0.0, 5.0, 0.05};
    spin::Grid tau{0.0, std::numbers::pi, std::numbers::pi / 500.0};
    std::vector<double> g_list;
    double G = 5.0;
    double alpha = 1.0;
    double probe_tau = std::numbers::pi / 10.0;

    double kappa = 1e-3;
    double dt = 0.0;  // 0 selects the default step
    int n_trajectories = 4000;
    int cutoff = 0;  // 0 selects the coherent-tail rule
    mcwf::Stepper stepper = mcwf::Stepper::exponential;

    int samples = 20;

    /// Defaults for one subcommand.
    static RunConfig defaults(const std::string& command)
    {
        RunConfig c;
        c.command = command;
        if (command == "spin-lg" || command == "entropy" || command == "verify") {
            return c;
        }
        if (command == "hybrid-lg") {
            return c;
        }
        if (command == "probe-prob") {
            c.alpha = 1.0;
            c.g_list = {0.5, 1.0, 2.0, 5.0, 10.0};
            c.tau = {0.0, std::numbers::pi, std::numbers::pi / 200.0};
            return c;
        }
        if (command == "open-lg") {
            c.G = 2.0;
            c.g_list = {2.5, 3.0, 3.5};
            c.tau = {0.02, 0.64, 0.02};
            return c;
        }
        throw InvalidArgument("unknown subcommand '" + command + "'");
    }

    void validate() const
    {
        auto check_grid = [](const spin::Grid& g, const char* name) {
            if (!(g.step > 0.0) || !(g.stop > g.start) || !std::isfinite(g.start) || !std::isfinite(g.stop)) {
                throw EmptyGrid(std::string(name) + " grid needs step > 0 and stop > start");
            }
        };
        if (command == "spin-lg") {
            check_grid(dtau, "dtau");
        }
        if (command == "entropy") {
            check_grid(g_grid, "G");
            if (g_grid.start < 0.0) {
                throw InvalidArgument("G must be non-negative");
            }
        }
        if (command == "hybrid-lg" || command == "probe-prob" || command == "open-lg") {
            check_grid(tau, "tau");
        }
        if (command == "probe-prob" || command == "open-lg") {
            if (g_list.empty()) {
                throw EmptyGrid("G list is empty");
            }
            for (std::size_t k = 1; k < g_list.size(); ++k) {
                if (!(g_list[k] > g_list[k - 1])) {
                    throw InvalidArgument("G list must be strictly increasing");
                }
            }
        }
        if (!(G >= 0.0) || !std::isfinite(alpha)) {
            throw InvalidArgument("need G >= 0 and finite alpha");
        }
        if (command == "open-lg") {
            if (!(kappa >= 0.0) || n_trajectories < 1 || dt < 0.0 || cutoff < 0) {
                throw InvalidArgument("need kappa >= 0, trajectories >= 1, dt >= 0, cutoff >= 0");
            }
        }
        if (command == "verify" && samples < 1) {
            throw InvalidArgument("verify needs at least one sample");
        }
        if (threads < 1) {
            throw InvalidArgument("threads must be at least 1");
        }
    }

    [[nodiscard]] std::vector<std::pair<std::string, std::string>> echo() const
    {
        auto grid = [](const spin::Grid& g) {
            return format_number(g.start) + ":" + format_number(g.stop) + ":" + format_number(g.step);
        };
        auto list = [](const std::vector<double>& xs) {
            std::string s;
            for (std::size_t k = 0; k < xs.size(); ++k) {
                s += (k ? ";" : "") + format_number(xs[k]);
            }
            return s;
        };
        std::vector<std::pair<std::string, std::string>> e{{"config.command", command},
                                                           {"config.threads", std::to_string(threads)}};
        if (command == "spin-lg") {
            e.emplace_back("config.dtau", grid(dtau));
        } else if (command == "entropy") {
            e.emplace_back("config.G", grid(g_grid));
        } else if (command == "hybrid-lg") {
            e.emplace_back("config.G", format_number(G));
            e.emplace_back("config.alpha", format_number(alpha));
            e.emplace_back("config.tau", grid(tau));
        } else if (command == "probe-prob") {
            e.emplace_back("config.alpha", format_number(alpha));
            e.emplace_back("config.g_list", list(g_list));
            e.emplace_back("config.tau", grid(tau));
        } else if (command == "open-lg") {
            e.emplace_back("config.G", format_number(G));
            e.emplace_back("config.alpha", format_number(alpha));
            e.emplace_back("config.tau", grid(tau));
            e.emplace_back("config.g_list", list(g_list));
            e.emplace_back("config.probe_tau", format_number(probe_tau));
            e.emplace_back("config.kappa", format_number(kappa));
            e.emplace_back("config.dt", format_number(dt));
            e.emplace_back("config.trajectories", std::to_string(n_trajectories));
            e.emplace_back("config.cutoff", std::to_string(cutoff));
            e.emplace_back("config.stepper", mcwf::to_string(stepper));
        } else if (command == "verify") {
            e.emplace_back("config.samples", std::to_string(samples));
        }
        return e;
    }
};

[[nodiscard]] inline ResultTable make_table(const RunConfig& cfg, std::vector<std::string> headers)
{
    ResultTable t(std::move(headers));
    t.add_meta("schema", std::to_string(kSchemaVersion));
    t.add_meta("version", kVersion);
    t.add_meta("seed", std::to_string(cfg.seed));
    for (auto& [k, v] : cfg.echo()) {
        t.add_meta(k, v);
    }
    return t;
}

/// Contiguous runs of grid points with value > 2, ends placed by linear
/// interpolation of the crossing with the neighbouring grid point. NaN
/// values break a run.
[[nodiscard]] inline std::vector<spin::Interval> grid_windows(const std::vector<double>& xs,
                                                              const std::vector<double>& ks, double bound = 2.0)
{
    std::vector<spin::Interval> out;
    auto above = [&](std::size_t k) { return !std::isnan(ks[k]) && ks[k] > bound; };
    auto crossing = [&](std::size_t in, std::size_t outside) {
        if (std::isnan(ks[outside])) {
            return xs[in];
        }
        const double f = (ks[in] - bound) / (ks[in] - ks[outside]);
        return xs[in] + f * (xs[outside] - xs[in]);
    };
    std::size_t k = 0;
    while (k < xs.size()) {
        if (!above(k)) {
            ++k;
            continue;
        }
        const std::size_t first = k;
        while (k + 1 < xs.size() && above(k + 1)) {
            ++k;
        }
        out.push_back({first == 0 ? xs.front() : crossing(first, first - 1),
                       k + 1 == xs.size() ? xs.back() : crossing(k, k + 1)});
        ++k;
    }
    return out;
}

[[nodiscard]] inline std::string format_windows(const std::vector<spin::Interval>& ws)
{
    std::string s;
    for (std::size_t k = 0; k < ws.size(); ++k) {
        s += (k ? ";" : "") + format_number(ws[k].start) + ":" + format_number(ws[k].end);
    }
    return s.empty() ? "none" : s;
}

/// Columns: dtau, K, C01, C03. Metadata: refined peak and violation windows.
[[nodiscard]] inline ResultTable cmd_spin_lg(const RunConfig& cfg)
{
    cfg.validate();
    ResultTable t = make_table(cfg, {"dtau", "K", "C01", "C03"});
    const std::vector<double> xs = cfg.dtau.points();
    std::size_t best = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double x = xs[k];
        t.add_row({x, spin::spin_lg(x), spin::spin_correlator(0, 1, x), spin::spin_correlator(0, 3, x)});
        if (t.rows()[k][1] > t.rows()[best][1]) {
            best = k;
        }
    }
    const double lo = xs[best == 0 ? 0 : best - 1];
    const double hi = xs[std::min(best + 1, xs.size() - 1)];
    const Peak peak = hi > lo ? refine_maximum([](double x) { return spin::spin_lg(x); }, lo, hi, 1e-10)
                              : Peak{xs[best], spin::spin_lg(xs[best])};
    t.add_meta("peak_dtau", peak.x);
    t.add_meta("peak_K", peak.value);
    t.add_meta("windows", format_windows(spin::violation_windows(cfg.dtau)));
    return t;
}

/// Columns: G, S_vN (reduced-state eigenvalues), S_closed_form.
[[nodiscard]] inline ResultTable cmd_entropy(const RunConfig& cfg)
{
    cfg.validate();
    ResultTable t = make_table(cfg, {"G", "S_vN", "S_closed_form"});
    for (double g : cfg.g_grid.points()) {
        t.add_row({g, entanglement_entropy(g), entanglement_entropy_closed_form(g)});
    }
    return t;
}

struct HybridPoint {
    bool feasible = false;
    LGResult lg;
};

[[nodiscard]] inline HybridPoint hybrid_point(double G, double alpha, double tau)
{
    try {
        return {true, lg_function(ProtocolParams(G, alpha, tau))};
    } catch (const NoSolution&) {
        return {};
    }
}

/// Columns: tau, feasible, C01, C12, C23, C03, K. Points where no ancilla reset
/// satisfies the constraint have feasible = 0 and NaN values.
[[nodiscard]] inline ResultTable cmd_hybrid_lg(const RunConfig& cfg)
{
    cfg.validate();
    ResultTable t = make_table(cfg, {"tau", "feasible", "C01", "C12", "C23", "C03", "K"});
    const std::vector<double> xs = cfg.tau.points();
    const auto pts = parallel_map<HybridPoint>(xs.size(), cfg.threads,
                                               [&](std::size_t k) { return hybrid_point(cfg.G, cfg.alpha, xs[k]); });
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> ks;
    std::size_t best = 0;
    bool any = false;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const HybridPoint& p = pts[k];
        if (p.feasible) {
            t.add_row({xs[k], 1.0, p.lg.c01, p.lg.c12, p.lg.c23, p.lg.c03, p.lg.k});
            if (!any || p.lg.k > pts[best].lg.k) {
                best = k;
                any = true;
            }
        } else {
            t.add_row({xs[k], 0.0, nan, nan, nan, nan, nan});
        }
        ks.push_back(p.feasible ? p.lg.k : nan);
    }
    if (any) {
        t.add_meta("peak_tau", xs[best]);
        t.add_meta("peak_K", pts[best].lg.k);
    }
    t.add_meta("windows", format_windows(grid_windows(xs, ks)));
    return t;
}

/// Columns: alpha, G, tau, P_plus_plus, cos2_tau; one tau sweep per G in the list.
[[nodiscard]] inline ResultTable cmd_probe_probability(const RunConfig& cfg)
{
    cfg.validate();
    ResultTable t = make_table(cfg, {"alpha", "G", "tau", "P_plus_plus", "cos2_tau"});
    const std::vector<double> xs = cfg.tau.points();
    for (double g : cfg.g_list) {
        for (double x : xs) {
            const double c = std::cos(x);
            t.add_row({cfg.alpha, g, x, conditional_probability(0, 1, 1, ProtocolParams(g, cfg.alpha, x)), c * c});
        }
    }
    return t;
}

[[nodiscard]] inline mcwf::TrajectoryConfig trajectory_config(const RunConfig& cfg, double G)
{
    mcwf::TrajectoryConfig t;
    t.kappa_over_eta = cfg.kappa;
    t.n_trajectories = cfg.n_trajectories;
    t.seed = cfg.seed;
    t.cutoff = cfg.cutoff;
    t.stepper = cfg.stepper;
    t.threads = cfg.threads;
    const double occupation = std::norm(Complex{cfg.alpha, -3.0 * G}) + 1.0;
    t.dt = cfg.dt > 0.0 ? cfg.dt
                        : (cfg.stepper == mcwf::Stepper::exponential ? mcwf::kExponentialDefaultDt
                                                                     : mcwf::default_dt(cfg.kappa, occupation, G));
    return t;
}

/// Columns: G, tau, feasible, K_unitary, K_open, C01..C03 of the open run and
/// the jumped fraction. Rows first sweep tau at the configured G, then probe
/// probe_tau for every G in the list.
[[nodiscard]] inline ResultTable cmd_open_lg(const RunConfig& cfg)
{
    cfg.validate();
    ResultTable t = make_table(cfg, {"G", "tau", "feasible", "K_unitary", "K_open", "C01_open", "C12_open",
                                     "C23_open", "C03_open", "jumped_fraction"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto evaluate = [&](double G, double x) -> std::vector<double> {
        const HybridPoint u = hybrid_point(G, cfg.alpha, x);
        if (!u.feasible) {
            return {G, x, 0.0, nan, nan, nan, nan, nan, nan, nan};
        }
        mcwf::TrajectoryConfig tc = trajectory_config(cfg, G);
        tc.threads = 1;
        const open::OpenLGDetail d = open::open_lg_detail(ProtocolParams(G, cfg.alpha, x), tc);
        return {G,           x,        1.0,      u.lg.k,   d.result.k,
                d.result.c01, d.result.c12, d.result.c23, d.result.c03,
                static_cast<double>(d.jumped) / static_cast<double>(d.trajectories)};
    };
    std::vector<std::pair<double, double>> jobs;
    const std::vector<double> xs = cfg.tau.points();
    for (double x : xs) {
        jobs.emplace_back(cfg.G, x);
    }
    for (double g : cfg.g_list) {
        jobs.emplace_back(g, cfg.probe_tau);
    }
    const auto rows = parallel_map<std::vector<double>>(
        jobs.size(), cfg.threads, [&](std::size_t k) { return evaluate(jobs[k].first, jobs[k].second); });
    std::vector<double> ku;
    std::vector<double> ko;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        t.add_row(rows[k]);
        if (k < xs.size()) {
            ku.push_back(rows[k][3]);
            ko.push_back(rows[k][4]);
        }
    }
    t.add_meta("windows_unitary", format_windows(grid_windows(xs, ku)));
    t.add_meta("windows_open", format_windows(grid_windows(xs, ko)));
    t.add_meta("dt", trajectory_config(cfg, cfg.G).dt);
    return t;
}

struct VerifyCheck {
    std::string name;
    double deviation;
    double tolerance;
};

/// Random closed-system comparisons between the coherent-state engine, the Fock
/// oracle and closed forms, for alpha <= 1 and G <= 3.
[[nodiscard]] inline std::vector<VerifyCheck> run_verification(std::uint64_t seed, int samples)
{
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto uniform = [&](double a, double b) { return a + (b - a) * u01(gen); };

    double overlap_dev = 0.0;
    double norm_dev = 0.0;
    double displace_dev = 0.0;
    double povm_dev = 0.0;
    double protocol_dev = 0.0;
    double cutoff_dev = 0.0;
    double entropy_dev = 0.0;
    for (int s = 0; s < samples; ++s) {
        const double alpha = uniform(0.0, 1.0);
        const double G = uniform(0.2, 3.0);
        const double tau = uniform(0.0, 0.5);
        const CoherentLabel a{uniform(-1.0, 1.0), uniform(-1.0, 1.0)};
        const CoherentLabel b{uniform(-1.0, 1.0), uniform(-1.0, 1.0)};
        const CoherentSuperposition sup = CoherentSuperposition::from_components(
            {{Complex{uniform(-1, 1), uniform(-1, 1)}, a}, {Complex{uniform(-1, 1), uniform(-1, 1)}, b}});
        const int n = fock::default_cutoff(std::max(a.modulus(), b.modulus()), G);

        overlap_dev = std::max(overlap_dev, std::abs(overlap(a, b) - coherent_fock(a, n).dot(coherent_fock(b, n))));
        const FockVector v = to_fock(sup, n);
        norm_dev = std::max(norm_dev, std::abs(norm_squared(sup) - v.squaredNorm()));
        const FockVector kicked =
            fock::UnitaryPropagator(fock::position_quadrature(n)).apply(v, G);
        displace_dev = std::max(displace_dev, (to_fock(displace_momentum(sup, G), n) - kicked).norm());
        const CoherentSuperposition unit = normalize(sup);
        const FockVector t = coherent_fock(CoherentLabel{alpha}, n);
        povm_dev = std::max(povm_dev, std::abs(povm_plus(unit, CoherentLabel{alpha}).probability -
                                               std::norm(t.dot(to_fock(unit, n)))));

        try {
            const ProtocolParams p(G, alpha, tau);
            const ProtocolChain chain = build_chain(p);
            const LGResult coh = lg_function(chain);
            const int nc = fock::default_cutoff(alpha, G);
            const fock::FockProtocolResult f = fock::run_protocol(p, chain, nc);
            const fock::FockProtocolResult f2 = fock::run_protocol(p, chain, 2 * nc);
            const std::array<double, 4> cc{coh.c01, coh.c12, coh.c23, coh.c03};
            const std::array<double, 4> cf{f.result.c01, f.result.c12, f.result.c23, f.result.c03};
            const std::array<double, 4> c2{f2.result.c01, f2.result.c12, f2.result.c23, f2.result.c03};
            for (int i = 0; i < 3; ++i) {
                const IntervalStatistics ci = interval_statistics(chain, i);
                const IntervalStatistics& fi = f.intervals[static_cast<std::size_t>(i)];
                const IntervalStatistics& gi = f2.intervals[static_cast<std::size_t>(i)];
                protocol_dev = std::max({protocol_dev, std::abs(ci.p_i_plus - fi.p_i_plus),
                                         std::abs(ci.p_plus_given_plus - fi.p_plus_given_plus),
                                         std::abs(ci.p_plus_given_minus - fi.p_plus_given_minus)});
                cutoff_dev = std::max({cutoff_dev, std::abs(gi.p_i_plus - fi.p_i_plus),
                                       std::abs(gi.p_plus_given_plus - fi.p_plus_given_plus),
                                       std::abs(gi.p_plus_given_minus - fi.p_plus_given_minus)});
            }
            for (std::size_t i = 0; i < 4; ++i) {
                protocol_dev = std::max(protocol_dev, std::abs(cc[i] - cf[i]));
                cutoff_dev = std::max(cutoff_dev, std::abs(c2[i] - cf[i]));
            }
        } catch (const NoSolution&) {
            // The reset constraint has no solution here; nothing to compare.
        }
        entropy_dev = std::max(entropy_dev, std::abs(entanglement_entropy(G) - entanglement_entropy_closed_form(G)));
    }
    return {{"overlap_vs_fock", overlap_dev, 1e-8},
            {"norm_vs_fock", norm_dev, 1e-8},
            {"displacement_vs_fock", displace_dev, 1e-8},
            {"povm_vs_fock", povm_dev, 1e-8},
            {"protocol_vs_fock", protocol_dev, 1e-7},
            {"cutoff_doubling", cutoff_dev, 1e-8},
            {"entropy_vs_closed_form", entropy_dev, 1e-10}};
}

/// Columns: check, deviation, tolerance, pass. Metadata maps check ids to names.
[[nodiscard]] inline ResultTable cmd_verify(const RunConfig& cfg)
{
    cfg.validate();
    ResultTable t = make_table(cfg, {"check", "deviation", "tolerance", "pass"});
    const auto checks = run_verification(cfg.seed, cfg.samples);
    bool all = true;
    for (std::size_t k = 0; k < checks.size(); ++k) {
        const bool ok = checks[k].deviation < checks[k].tolerance;
        all = all && ok;
        t.add_meta("check." + std::to_string(k), checks[k].name);
        t.add_row({static_cast<double>(k), checks[k].deviation, checks[k].tolerance, ok ? 1.0 : 0.0});
    }
    t.add_meta("all_pass", all ? "1" : "0");
    return t;
}

[[nodiscard]] inline ResultTable run_command(const RunConfig& cfg)
{
    if (cfg.command == "spin-lg") {
        return cmd_spin_lg(cfg);
    }
    if (cfg.command == "entropy") {
        return cmd_entropy(cfg);
    }
    if (cfg.command == "hybrid-lg") {
        return cmd_hybrid_lg(cfg);
    }
    if (cfg.command == "probe-prob") {
        return cmd_probe_probability(cfg);
    }
    if (cfg.command == "open-lg") {
        return cmd_open_lg(cfg);
    }
    if (cfg.command == "verify") {
        return cmd_verify(cfg);
    }
    throw InvalidArgument("unknown subcommand '" + cfg.command + "'");
}

}  // namespace hybridlg::cli
