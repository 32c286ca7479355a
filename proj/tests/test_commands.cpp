#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hybridlg/commands.hpp"

using namespace hybridlg;
using namespace hybridlg::cli;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

std::string csv(const ResultTable& t)
{
    std::ostringstream os;
    t.write_csv(os);
    return os.str();
}

}  // namespace

TEST_CASE("number formatting round-trips", "[cli]")
{
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(std::nan("")) == "nan");
    const double x = 0.1 + 0.2;
    CHECK(std::stod(format_number(x)) == x);
}

TEST_CASE("result table", "[cli]")
{
    ResultTable t({"a", "b"});
    t.add_meta("k", "v");
    t.add_row({1.0, 2.0});
    CHECK_THROWS_AS(t.add_row({1.0}), DimensionMismatch);
    CHECK_THROWS_AS(ResultTable({"a", "a"}), InvalidArgument);
    CHECK(t.column_values("b") == std::vector<double>{2.0});
    CHECK_THROWS_AS(t.meta("missing"), InvalidArgument);
    CHECK(csv(t) == "# k=v\na,b\n1,2\n");
}

TEST_CASE("metadata header", "[cli]")
{
    RunConfig cfg = RunConfig::defaults("entropy");
    cfg.seed = 31;
    cfg.g_grid = {0.0, 1.0, 0.5};
    const std::string out = csv(run_command(cfg));
    CHECK_THAT(out, ContainsSubstring("# schema=1\n"));
    CHECK_THAT(out, ContainsSubstring(std::string("# version=") + kVersion + "\n"));
    CHECK_THAT(out, ContainsSubstring("# seed=31\n"));
    CHECK_THAT(out, ContainsSubstring("# config.G=0:1:0.5\n"));
    CHECK_THAT(out, ContainsSubstring("G,S_vN,S_closed_form\n"));
}

TEST_CASE("config validation", "[cli]")
{
    RunConfig cfg = RunConfig::defaults("spin-lg");
    cfg.dtau = {1.0, 1.0, 0.1};
    CHECK_THROWS_AS(run_command(cfg), EmptyGrid);
    RunConfig probe = RunConfig::defaults("probe-prob");
    probe.g_list = {2.0, 1.0};
    CHECK_THROWS_AS(run_command(probe), InvalidArgument);
    probe.g_list.clear();
    CHECK_THROWS_AS(run_command(probe), EmptyGrid);
    CHECK_THROWS_AS(RunConfig::defaults("nope"), InvalidArgument);
    RunConfig open = RunConfig::defaults("open-lg");
    open.n_trajectories = 0;
    CHECK_THROWS_AS(open.validate(), InvalidArgument);
}

TEST_CASE("grid windows", "[cli]")
{
    const std::vector<double> xs{0.0, 1.0, 2.0, 3.0, 4.0};
    const std::vector<double> ks{1.0, 3.0, 3.0, 1.0, std::nan("")};
    const auto ws = grid_windows(xs, ks);
    REQUIRE(ws.size() == 1);
    CHECK_THAT(ws[0].start, WithinAbs(0.5, 1e-15));
    CHECK_THAT(ws[0].end, WithinAbs(2.5, 1e-15));
    CHECK(format_windows({}) == "none");
    const std::vector<double> high{3.0, 3.0};
    const auto edge = grid_windows({0.0, 1.0}, high);
    CHECK(edge[0].start == 0.0);
    CHECK(edge[0].end == 1.0);
}

TEST_CASE("spin sweep", "[cli]")
{
    const ResultTable t = run_command(RunConfig::defaults("spin-lg"));
    CHECK(t.rows().size() == 401);
    CHECK_THAT(std::stod(t.meta("peak_K")), WithinAbs(2.0 * std::numbers::sqrt2, 1e-9));
    CHECK_THAT(std::stod(t.meta("peak_dtau")), WithinAbs(std::numbers::pi / 8.0, 1e-6));
    CHECK_THAT(t.meta("windows"), ContainsSubstring(":0.598"));
}

TEST_CASE("entropy sweep", "[cli]")
{
    const ResultTable t = run_command(RunConfig::defaults("entropy"));
    const auto a = t.column_values("S_vN");
    const auto b = t.column_values("S_closed_form");
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK_THAT(a[k], WithinAbs(b[k], 1e-10));
    }
}

TEST_CASE("hybrid sweep marks infeasible points", "[cli]")
{
    RunConfig cfg = RunConfig::defaults("hybrid-lg");
    cfg.G = 2.0;
    cfg.tau = {0.55, 0.7, 0.05};
    cfg.threads = 2;
    const ResultTable t = run_command(cfg);
    const auto feasible = t.column_values("feasible");
    const auto ks = t.column_values("K");
    CHECK(feasible.front() == 1.0);
    CHECK(feasible.back() == 0.0);
    CHECK(std::isnan(ks.back()));
    CHECK_THAT(ks.front(), WithinAbs(lg_function(ProtocolParams(2.0, 1.0, 0.55)).k, 1e-15));
}

TEST_CASE("hybrid sweep does not depend on the thread count", "[cli][property]")
{
    RunConfig cfg = RunConfig::defaults("hybrid-lg");
    cfg.tau = {0.0, 1.0, 0.05};
    const std::string one = csv(run_command(cfg));
    cfg.threads = 3;
    std::string three = csv(run_command(cfg));
    three.replace(three.find("config.threads=3"), 16, "config.threads=1");
    CHECK(one == three);
}

TEST_CASE("probe probability sweep", "[cli]")
{
    RunConfig cfg = RunConfig::defaults("probe-prob");
    cfg.tau = {0.0, std::numbers::pi, std::numbers::pi / 50.0};
    const ResultTable t = run_command(cfg);
    CHECK(t.rows().size() == 5 * 51);
    for (const auto& r : t.rows()) {
        CHECK(r[3] >= 0.0);
        CHECK(r[3] <= 1.0);
        if (r[1] == 10.0) {
            CHECK_THAT(r[3], WithinAbs(r[4], 1e-10));
        }
    }
}

TEST_CASE("verification checks pass", "[cli]")
{
    RunConfig cfg = RunConfig::defaults("verify");
    cfg.samples = 6;
    cfg.seed = 3;
    const ResultTable t = run_command(cfg);
    CHECK(t.meta("all_pass") == "1");
    CHECK(t.rows().size() == 7);
    CHECK(t.meta("check.4") == "protocol_vs_fock");
}

TEST_CASE("open sweep without damping reproduces the closed sweep", "[cli]")
{
    RunConfig cfg = RunConfig::defaults("open-lg");
    cfg.kappa = 0.0;
    cfg.tau = {0.1, 0.3, 0.1};
    cfg.g_list = {2.5};
    cfg.n_trajectories = 10;
    cfg.seed = 5;
    const ResultTable t = run_command(cfg);
    CHECK(t.rows().size() == 4);
    for (const auto& r : t.rows()) {
        CHECK_THAT(r[4], WithinAbs(r[3], 1e-6));
        CHECK(r[9] == 0.0);
    }
    CHECK(csv(t) == csv(run_command(cfg)));
    CHECK(t.meta("dt") == "0.01");
    CHECK_THAT(csv(t), ContainsSubstring("# config.stepper=exponential\n"));
}
