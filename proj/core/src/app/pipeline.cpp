#include "rodnet/app.hpp"
#include "rodnet/reference.hpp"
#include "rodnet/so3.hpp"

#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <ostream>

namespace rodnet::app {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

ojson vec_json(const Vec3 &v) { return ojson::array({v(0), v(1), v(2)}); }

std::string join(const std::string &dir, const std::string &name) { return (fs::path(dir) / name).string(); }

void ensure_dir(const std::string &dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw IoError("cannot create output directory '" + dir + "'");
}

// Runs `body`, mapping exceptions onto exit codes.
template <class F> int guarded(std::ostream &log, F &&body)
{
    try {
        return body();
    } catch (const IoError &e) {
        log << "error: " << e.what() << "\n";
        return usage_or_io;
    } catch (const ValidationError &e) {
        log << "error: " << e.what() << "\n";
        return invalid_input;
    } catch (const NumericalError &e) {
        log << "error: " << e.what() << "\n";
        return not_converged;
    }
}

void apply_flags(const Flags &flags, RunConfig &cfg)
{
    if (flags.seed)
        cfg.solver.seed = *flags.seed;
    if (flags.init)
        apply_init_spec(*flags.init, cfg.solver);
    if (flags.segments) {
        if (*flags.segments < 2)
            throw ValidationError("--segments must be at least 2");
        cfg.solver.segments = {*flags.segments};
    }
    if (flags.allow_unbalanced)
        cfg.solver.allow_unbalanced = true;
    if (flags.emit_plot_data)
        cfg.emit_plot_data = true;
    if (flags.threads < 1)
        throw ValidationError("--threads must be at least 1");
    cfg.solver.threads = flags.threads;
}

std::string output_dir(const Flags &flags, const RunConfig &cfg) { return flags.out.empty() ? cfg.output_dir : flags.out; }

ojson residual_block(const post::Residuals &r)
{
    ojson o;
    o["ode_couple_residual"] = r.ode_couple;
    o["end_couple_norms"] = r.end_couple;
    o["junction_force_residual"] = r.junction_force;
    o["junction_couple_residual"] = r.junction_couple;
    o["junction_rotation_spread"] = r.junction_rotation_spread;
    o["junction_position_spread"] = r.junction_position_spread;
    o["inextensibility_error"] = r.inextensibility;
    return o;
}

double couple_threshold(const RunConfig &cfg, const Network &network)
{
    if (cfg.thresholds.junction_couple)
        return *cfg.thresholds.junction_couple;
    return std::max(1e-5 * network.load_scale() * network.max_length(), 1e-10);
}

std::vector<int> segments_of(const solver::RotationField &field)
{
    std::vector<int> seg(field.rods());
    for (std::size_t i = 0; i < field.rods(); ++i)
        seg[i] = field.segments(i);
    return seg;
}

} // namespace

int run_section(const Flags &flags, std::ostream &log)
{
    return guarded(log, [&] {
        std::vector<std::size_t> rods;
        const auto sections = load_sections(flags.config, &rods);
        if (!flags.out.empty())
            ensure_dir(flags.out);
        for (std::size_t j = 0; j < sections.size(); ++j) {
            const SectionInput &s = sections[j];
            const std::string where = rods.empty() ? "section" : "rods[" + std::to_string(rods[j]) + "].stiffness";
            xsection::SectionStiffness st;
            try {
                st = xsection::compute_H(s.geometry, s.material, s.mesh_size, flags.threads);
            } catch (const xsection::MeshingError &e) {
                throw ValidationError(where + ": " + e.what() + " (vertex " + std::to_string(e.vertex_index()) + ")");
            }
            const std::string text = section_json(st);
            if (flags.out.empty()) {
                log << text;
            } else {
                const std::string name = rods.empty() ? "section.json" : "section_" + std::to_string(rods[j]) + ".json";
                write_file(join(flags.out, name), text);
                log << "wrote " << join(flags.out, name) << "\n";
            }
        }
        return static_cast<int>(ok);
    });
}

int run_solve(const Flags &flags, std::ostream &log)
{
    return guarded(log, [&] {
        RunConfig cfg = load_config(flags.config);
        apply_flags(flags, cfg);
        const BuiltNetwork built = build_network(cfg.network, flags.threads);
        const Network &network = built.network;
        for (const auto &w : network.warnings)
            log << "warning: " << w << "\n";

        const std::string dir = output_dir(flags, cfg);
        ensure_dir(dir);
        write_file(join(dir, "config.normalized.json"), normalized_config(cfg));
        for (std::size_t i = 0; i < built.sections.size(); ++i)
            if (built.sections[i])
                write_file(join(dir, "section_" + std::to_string(i) + ".json"), section_json(*built.sections[i]));

        const solver::SolveResult result = solver::solve(network, cfg.solver);
        write_file(join(dir, "trace.csv"), trace_csv(result.trace));

        const post::EquilibriumReport report = post::residuals(result.field, network);
        const double threshold = couple_threshold(cfg, network);
        const bool residual_ok = report.residuals.junction_couple <= threshold;
        const bool converged = result.converged();
        std::string status = "ok";
        if (!converged)
            status = "not_converged";
        else if (!residual_ok)
            status = "threshold_exceeded";

        ojson root;
        root["version"] = 1;
        root["status"] = status;
        root["solver"] = {{"optimizer", solver::to_string(cfg.solver.optimizer)},
                          {"termination", solver::to_string(result.trace.termination)},
                          {"message", result.trace.message},
                          {"iterations", result.trace.iterations},
                          {"gradient_tolerance", result.trace.tolerance},
                          {"segments", segments_of(result.field)}};
        root["energy"] = report.energy;
        root["gradient_norm"] = report.gradient_norm;
        const Quat &J = result.field.junction();
        root["junction_rotation"] = ojson::array({J.w(), J.x(), J.y(), J.z()});
        ojson forces = ojson::array();
        for (const auto &p : result.balance.junction_forces)
            forces.push_back(vec_json(p));
        root["balance"] = {{"resultant", vec_json(result.balance.resultant)},
                           {"threshold", result.balance.threshold},
                           {"passed", result.balance.passed},
                           {"junction_forces", forces}};
        root["residuals"] = residual_block(report.residuals);
        root["thresholds"] = {{"gradient", result.trace.tolerance}, {"junction_couple", threshold}};
        ojson rods = ojson::array();
        for (std::size_t i = 0; i < report.rods.size(); ++i) {
            const std::string name = "rod_" + std::to_string(i) + ".csv";
            write_file(join(dir, name), rod_csv(report.rods[i]));
            const Mat3 &H = network.rods[i].H;
            ojson Hj = ojson::array();
            for (int r = 0; r < 3; ++r)
                Hj.push_back(ojson::array({H(r, 0), H(r, 1), H(r, 2)}));
            rods.push_back({{"index", i},
                            {"length", network.rods[i].length},
                            {"segments", result.field.segments(i)},
                            {"energy", report.rods[i].energy},
                            {"H", Hj},
                            {"file", name}});
        }
        root["rods"] = rods;
        root["warnings"] = network.warnings;
        write_file(join(dir, "report.json"), root.dump(2) + "\n");
        if (cfg.emit_plot_data)
            write_file(join(dir, "plot_data.csv"), plot_csv(report));

        log << "status: " << status << " (" << solver::to_string(result.trace.termination) << " after "
            << result.trace.iterations << " iterations, energy " << format_double(report.energy) << ")\n";
        if (!result.trace.message.empty())
            log << "solver: " << result.trace.message << "\n";
        log << "wrote " << dir << "\n";
        return static_cast<int>(status == "ok" ? ok : not_converged);
    });
}

int run_verify(const Flags &flags, std::ostream &log)
{
    return guarded(log, [&] {
        RunConfig cfg = load_config(flags.config);
        apply_flags(flags, cfg);
        if (flags.solution.empty())
            throw ValidationError("verify needs --solution DIR");
        const BuiltNetwork built = build_network(cfg.network, flags.threads);
        const Network &network = built.network;

        json rep;
        try {
            rep = json::parse(read_file(join(flags.solution, "report.json")));
        } catch (const json::parse_error &e) {
            throw ValidationError(join(flags.solution, "report.json") + ": malformed JSON: " + e.what());
        }
        if (!rep.contains("junction_rotation") || !rep["junction_rotation"].is_array() ||
            rep["junction_rotation"].size() != 4)
            throw ValidationError("report.json.junction_rotation: expected [w, x, y, z]");
        const auto &jq = rep["junction_rotation"];
        const Quat J(jq[0].get<double>(), jq[1].get<double>(), jq[2].get<double>(), jq[3].get<double>());

        std::vector<std::vector<Quat>> nodes;
        std::vector<int> seg;
        for (std::size_t i = 0; i < network.rods.size(); ++i) {
            nodes.push_back(read_rod_quaternions(join(flags.solution, "rod_" + std::to_string(i) + ".csv")));
            seg.push_back(static_cast<int>(nodes.back().size()) - 1);
        }
        solver::RotationField field(network, seg);
        field.set_junction(J);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (so3::geodesic_distance(nodes[i][0], field.node(i, 0)) > 1e-12)
                throw ValidationError("rod_" + std::to_string(i) +
                                      ".csv: first node disagrees with the junction rotation");
            for (int k = 1; k <= seg[i]; ++k)
                field.set_node(i, k, nodes[i][static_cast<std::size_t>(k)]);
        }

        const post::EquilibriumReport report = post::residuals(field, network);
        const double threshold = couple_threshold(cfg, network);
        ojson root;
        root["version"] = 1;
        root["energy"] = report.energy;
        root["gradient_norm"] = report.gradient_norm;
        root["residuals"] = residual_block(report.residuals);
        root["thresholds"] = {{"junction_couple", threshold}};
        const std::string text = root.dump(2) + "\n";
        if (flags.out.empty()) {
            log << text;
        } else {
            ensure_dir(flags.out);
            write_file(join(flags.out, "verify.json"), text);
            log << "wrote " << join(flags.out, "verify.json") << "\n";
        }
        return static_cast<int>(report.residuals.junction_couple <= threshold ? ok : not_converged);
    });
}

int run_linref(const Flags &flags, std::ostream &log)
{
    return guarded(log, [&] {
        RunConfig cfg = load_config(flags.config);
        apply_flags(flags, cfg);
        const BuiltNetwork built = build_network(cfg.network, flags.threads);
        const int N = cfg.solver.segments_for(built.network.rods.size()).front();
        const reference::LinearSolution sol = reference::solve_linearized(built.network, N);
        const auto y = sol.centerline(built.network);

        const std::string dir = output_dir(flags, cfg);
        ensure_dir(dir);
        ojson root;
        root["version"] = 1;
        root["segments"] = N;
        root["omega_junction"] = vec_json(sol.omega_junction);
        root["u_junction"] = vec_json(sol.u_junction);
        write_file(join(dir, "linref.json"), root.dump(2) + "\n");
        for (std::size_t i = 0; i < sol.u.size(); ++i) {
            std::string csv = "x1,y1,y2,y3,u1,u2,u3,w1,w2,w3\n";
            for (std::size_t k = 0; k < sol.u[i].size(); ++k) {
                csv += format_double(sol.x[i][k]);
                for (const Vec3 *v : {&y[i][k], &sol.u[i][k], &sol.omega[i][k]})
                    for (int c = 0; c < 3; ++c)
                        csv += "," + format_double((*v)(c));
                csv += "\n";
            }
            write_file(join(dir, "linref_rod_" + std::to_string(i) + ".csv"), csv);
        }
        log << "wrote " << dir << "\n";
        return static_cast<int>(ok);
    });
}

} // namespace rodnet::app
