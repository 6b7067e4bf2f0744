#include "scenarios.hpp"

#include <gtest/gtest.h>

#include "json.hpp"

using namespace rodnet;
using namespace rodnet::testing;
namespace fs = std::filesystem;

namespace {

std::string cfg(const std::string &name) { return "--config \"" + data_path(name).string() + "\""; }
std::string out(const fs::path &p) { return " --out \"" + p.string() + "\""; }

} // namespace

TEST(Cli, ZeroLoadSolve)
{
    const auto dir = scratch_dir("cli_zero");
    EXPECT_EQ(run_cli("solve " + cfg("zero_load.json") + out(dir)), 0);
    for (const char *f : {"report.json", "rod_0.csv", "rod_1.csv", "trace.csv", "config.normalized.json"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    const auto rep = nlohmann::json::parse(read_text(dir / "report.json"));
    EXPECT_EQ(rep["status"], "ok");
    EXPECT_EQ(rep["solver"]["iterations"], 0);
    // straight rod along e1 of length 1 at N = 16: y1 runs from -1 to 0
    const std::string csv = read_text(dir / "rod_0.csv");
    EXPECT_NE(csv.find("\n0,-1,0,0,1,0,0,0,"), std::string::npos);
}

TEST(Cli, UnbalancedExitsThree)
{
    const auto dir = scratch_dir("cli_unbalanced");
    EXPECT_EQ(run_cli("solve " + cfg("unbalanced_pull.json") + out(dir), dir / "log.txt"), 3);
    EXPECT_NE(read_text(dir / "log.txt").find("force balance"), std::string::npos);
    EXPECT_EQ(run_cli("solve " + cfg("unbalanced_pull.json") + out(dir / "o") + " --allow-unbalanced"), 0);
}

TEST(Cli, PlotData)
{
    const auto dir = scratch_dir("cli_plot");
    EXPECT_EQ(run_cli("solve " + cfg("star.json") + out(dir) + " --emit-plot-data"), 0);
    const std::string csv = read_text(dir / "plot_data.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "rod,x1,quantity,value");
    const auto plain = scratch_dir("cli_plot_plain");
    EXPECT_EQ(run_cli("solve " + cfg("star.json") + out(plain)), 0);
    EXPECT_FALSE(fs::exists(plain / "plot_data.csv"));
}

TEST(Cli, SectionCircle)
{
    const auto dir = scratch_dir("cli_section");
    EXPECT_EQ(run_cli("section " + cfg("circle_section.json") + out(dir)), 0);
    const auto j = nlohmann::json::parse(read_text(dir / "section.json"));
    for (int k = 0; k < 3; ++k)
        EXPECT_LT(std::abs(j["H"][k][k].get<double>() - pi / 2.0) / (pi / 2.0), 0.01);
}

TEST(Cli, VerifyReproducesResidualBlock)
{
    const auto dir = scratch_dir("cli_verify");
    ASSERT_EQ(run_cli("solve " + cfg("star.json") + out(dir / "solve")), 0);
    ASSERT_EQ(run_cli("verify " + cfg("star.json") + " --solution \"" + (dir / "solve").string() + "\"" + out(dir / "v")), 0);
    const auto a = nlohmann::json::parse(read_text(dir / "solve" / "report.json"));
    const auto b = nlohmann::json::parse(read_text(dir / "v" / "verify.json"));
    EXPECT_EQ(a["residuals"].dump(), b["residuals"].dump());
    EXPECT_EQ(a["energy"], b["energy"]);
}

TEST(Cli, SeededPerturbedRunsAreIdentical)
{
    const auto dir = scratch_dir("cli_det");
    const std::string args = "solve " + cfg("star.json") + " --seed 7 --init perturbed:1e-3";
    ASSERT_EQ(run_cli(args + out(dir / "a")), 0);
    ASSERT_EQ(run_cli(args + out(dir / "b")), 0);
    ASSERT_EQ(run_cli(args + " --threads 4" + out(dir / "c")), 0);
    EXPECT_TRUE(same_tree(dir / "a", dir / "b"));
    EXPECT_TRUE(same_tree(dir / "a", dir / "c"));
}

TEST(Cli, NormalizedConfigReproducesRun)
{
    const auto dir = scratch_dir("cli_roundtrip");
    ASSERT_EQ(run_cli("solve " + cfg("star.json") + " --seed 3 --init perturbed:1e-2" + out(dir / "a")), 0);
    ASSERT_EQ(run_cli("solve --config \"" + (dir / "a" / "config.normalized.json").string() + "\"" + out(dir / "b")), 0);
    EXPECT_TRUE(same_tree(dir / "a", dir / "b"));
}

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(run_cli("frobnicate"), 1);
    EXPECT_EQ(run_cli(""), 1);
    EXPECT_EQ(run_cli("solve"), 1);
    EXPECT_EQ(run_cli("solve --config /nonexistent.json"), 1);
    EXPECT_EQ(run_cli("solve " + cfg("star.json") + " --threads 0"), 1);
    EXPECT_EQ(run_cli("--help"), 0);
}

TEST(Cli, NonConvergenceExitsTwo)
{
    const auto dir = scratch_dir("cli_noconv");
    const std::string text = R"({"version": 1, "rods": [
      {"length": 1, "frame": {"quaternion": [1, 0, 0, 0]}, "stiffness": {"H": [[1,0,0],[0,1,0],[0,0,1]]},
       "loads": {"end_force": [1, 0.5, 0]}},
      {"length": 1, "frame": {"tangent": [-1, 0, 0], "axis": [0, 1, 0]}, "stiffness": {"H": [[1,0,0],[0,1,0],[0,0,1]]},
       "loads": {"end_force": [-1, -0.5, 0]}}],
      "solver": {"segments": 16, "max_iterations": 1}})";
    app::write_file((dir / "c.json").string(), text);
    EXPECT_EQ(run_cli("solve --config \"" + (dir / "c.json").string() + "\"" + out(dir / "o")), 2);
    const auto rep = nlohmann::json::parse(read_text(dir / "o" / "report.json"));
    EXPECT_EQ(rep["status"], "not_converged");
}

TEST(Cli, InvalidConfigExitsThree)
{
    const auto dir = scratch_dir("cli_invalid");
    app::write_file((dir / "c.json").string(), R"({"version": 1, "rods": [{"length": -1}]})");
    EXPECT_EQ(run_cli("solve --config \"" + (dir / "c.json").string() + "\"" + out(dir / "o"), dir / "log"), 3);
    EXPECT_NE(read_text(dir / "log").find("rods[0].length"), std::string::npos);
}

TEST(Cli, LinrefHiddenButAvailable)
{
    const auto dir = scratch_dir("cli_linref");
    EXPECT_EQ(run_cli("--help", dir / "help.txt"), 0);
    EXPECT_EQ(run_cli("linref " + cfg("zero_load.json") + out(dir / "l")), 0);
    EXPECT_TRUE(fs::exists(dir / "l" / "linref.json"));
    EXPECT_TRUE(fs::exists(dir / "l" / "linref_rod_0.csv"));
}
