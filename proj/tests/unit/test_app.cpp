#include "scenarios.hpp"

#include <gtest/gtest.h>

#include "json.hpp"

using namespace rodnet;
using namespace rodnet::app;
using namespace rodnet::testing;

namespace {

std::string error_of(const std::string &text)
{
    try {
        build_network(parse_config(text).network);
    } catch (const ValidationError &e) {
        return e.what();
    }
    return "";
}

const char *minimal = R"({"version": 1, "rods": [{"length": 1.0, "frame": {"quaternion": [1, 0, 0, 0]},
                           "stiffness": {"H": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}}]})";

} // namespace

TEST(Config, MinimalDefaults)
{
    const RunConfig c = parse_config(minimal);
    ASSERT_EQ(c.network.rods.size(), 1u);
    EXPECT_EQ(c.solver.optimizer, solver::Optimizer::newton);
    EXPECT_EQ(c.solver.g_tol, 1e-8);
    EXPECT_EQ(c.output_dir, "out");
    EXPECT_FALSE(c.thresholds.junction_couple.has_value());
    EXPECT_FALSE(c.emit_plot_data);
}

TEST(Config, ErrorsNameTheField)
{
    EXPECT_NE(error_of("{").find("malformed JSON"), std::string::npos);
    EXPECT_NE(error_of(R"({"version": 2, "rods": []})").find("version"), std::string::npos);
    EXPECT_NE(error_of(R"({"version": 1, "rods": [{"length": -1}]})").find("rods[0].length"), std::string::npos);
    EXPECT_NE(error_of(R"({"version": 1, "rods": [{"length": 1, "frame": {"quaternion": [2, 0, 0, 0]}}]})")
                  .find("rods[0].frame"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"version": 1, "rods": [{"length": 1, "colour": 3}]})").find("rods[0].colour"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"version": 1, "rods": [{"length": 1, "frame": {"quaternion": [1, 0, 0, 0]}, "stiffness": {"H": [[1,0,0],[0,1,0],[0,0,1]]}}], "solver": {"optimizer": "simplex"}})")
                  .find("solver.optimizer"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"version": 1, "rods": [{"length": 1, "frame": {"quaternion": [1, 0, 0, 0]}, "stiffness": {"H": [[1,0,0],[0,-1,0],[0,0,1]]}}]})")
                  .find("rods[0].stiffness"),
              std::string::npos);
}

TEST(Config, ReflectionFrameRejected)
{
    const std::string e =
        error_of(R"({"version": 1, "rods": [{"length": 1, "frame": {"matrix": [[1,0,0],[0,1,0],[0,0,-1]]}}]})");
    EXPECT_NE(e.find("rods[0].frame"), std::string::npos);
    EXPECT_NE(e.find("reflection"), std::string::npos);
}

TEST(Config, NormalizedIsFixedPoint)
{
    const RunConfig c = load_config(data_path("star.json").string());
    const std::string once = normalized_config(c);
    const std::string twice = normalized_config(parse_config(once));
    EXPECT_EQ(once, twice);
    const auto j = nlohmann::json::parse(once);
    EXPECT_TRUE(j["rods"][0]["frame"].contains("quaternion"));
}

TEST(Config, NormalizedReproducesNetwork)
{
    const RunConfig c = load_config(data_path("star.json").string());
    const RunConfig d = parse_config(normalized_config(c));
    const Network a = build_network(c.network).network, b = build_network(d.network).network;
    for (std::size_t i = 0; i < a.rods.size(); ++i) {
        EXPECT_EQ(a.rods[i].frame.coeffs(), b.rods[i].frame.coeffs());
        EXPECT_EQ(a.rods[i].H, b.rods[i].H);
        EXPECT_EQ(a.rods[i].end_force, b.rods[i].end_force);
        EXPECT_EQ(cumulative_load(a.rods[i], 0.3), cumulative_load(b.rods[i], 0.3));
    }
    EXPECT_EQ(c.solver.segments_for(3), d.solver.segments_for(3));
    EXPECT_EQ(c.solver.g_tol, d.solver.g_tol);
}

TEST(Config, InitSpec)
{
    solver::SolverOptions o;
    apply_init_spec("perturbed:1e-3", o);
    EXPECT_EQ(o.init, solver::InitKind::perturbed);
    EXPECT_EQ(o.amplitude, 1e-3);
    EXPECT_EQ(init_spec(o), "perturbed:0.001");
    apply_init_spec("straight", o);
    EXPECT_EQ(o.init, solver::InitKind::straight);
    EXPECT_THROW(apply_init_spec("perturbed:", o), ValidationError);
    EXPECT_THROW(apply_init_spec("perturbed:-1", o), ValidationError);
    EXPECT_THROW(apply_init_spec("wobbly", o), ValidationError);
}

TEST(Config, SectionsFromNetworkConfig)
{
    const std::string text = R"({"version": 1, "rods": [
        {"length": 1, "frame": {"quaternion": [1, 0, 0, 0]}, "stiffness": {"H": [[1,0,0],[0,1,0],[0,0,1]]}},
        {"length": 1, "frame": {"tangent": [0, 1, 0], "axis": [0, 0, 1]},
         "stiffness": {"section": {"kind": "rectangle", "width": 1, "height": 0.5},
                       "material": {"lambda": 0, "mu": 1}, "mesh_size": 0.1}}]})";
    const auto dir = scratch_dir("sections");
    write_file((dir / "net.json").string(), text);
    std::vector<std::size_t> rods;
    const auto s = load_sections((dir / "net.json").string(), &rods);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(rods, std::vector<std::size_t>{1});
    EXPECT_EQ(s[0].geometry.kind, xsection::SectionKind::rectangle);
}

TEST(Output, FormatDoubleRoundTrips)
{
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0})
        EXPECT_EQ(std::stod(format_double(v)), v);
    EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Output, RodCsvRoundTripsQuaternions)
{
    const Network n = asymmetric_star();
    const auto field = random_field(n, 6, 3, 0.3);
    const auto rep = post::residuals(field, n);
    const std::string csv = rod_csv(rep.rods[1]);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "x1,y1,y2,y3,qw,qx,qy,qz,s1,s2,s3,p1,p2,p3,m1,m2,m3");
    const auto dir = scratch_dir("rodcsv");
    write_file((dir / "rod.csv").string(), csv);
    const auto q = read_rod_quaternions((dir / "rod.csv").string());
    ASSERT_EQ(q.size(), 7u);
    for (int k = 0; k <= 6; ++k)
        EXPECT_EQ(q[static_cast<std::size_t>(k)].coeffs(), field.node(1, k).coeffs());
}

TEST(Output, RodCsvRejectsGarbage)
{
    const auto dir = scratch_dir("badcsv");
    write_file((dir / "a.csv").string(), "x1,y1\n0,1\n");
    EXPECT_THROW(read_rod_quaternions((dir / "a.csv").string()), ValidationError);
    EXPECT_THROW(read_rod_quaternions((dir / "missing.csv").string()), IoError);
}

TEST(Output, PlotCsvIsLongFormat)
{
    const Network n = planar_star();
    const auto rep = post::residuals(solver::RotationField(n, {4, 4, 4}), n);
    const std::string csv = plot_csv(rep);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "rod,x1,quantity,value");
    const auto lines = std::count(csv.begin(), csv.end(), '\n');
    EXPECT_EQ(lines, 1 + 3 * 5 * 12);
}

TEST(Output, SectionJsonShape)
{
    xsection::SectionStiffness st;
    st.stiffness.H = Vec3(1, 2, 3).asDiagonal();
    st.mesh_nodes = 10;
    st.mesh_triangles = 12;
    const auto j = nlohmann::json::parse(section_json(st));
    EXPECT_EQ(j["H"][1][1].get<double>(), 2.0);
    EXPECT_EQ(j["mesh"]["nodes"].get<int>(), 10);
    EXPECT_EQ(j["mesh"]["triangles"].get<int>(), 12);
    EXPECT_TRUE(j["normalization"].contains("centroid"));
    EXPECT_TRUE(j["normalization"].contains("rotation_angle"));
}

TEST(Output, TraceCsv)
{
    solver::SolveTrace t;
    t.entries = {{0, 1.0, 0.5, 0.0}, {1, 0.25, 0.125, 1.0}};
    EXPECT_EQ(trace_csv(t), "iteration,energy,grad_norm,step\n0,1,0.5,0\n1,0.25,0.125,1\n");
}

TEST(Pipeline, MissingConfigIsIoError)
{
    Flags f;
    f.config = "/nonexistent/config.json";
    std::ostringstream log;
    EXPECT_EQ(run_solve(f, log), usage_or_io);
}
