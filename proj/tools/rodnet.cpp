#include "rodnet/app.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

void add_common(CLI::App *cmd, rodnet::app::Flags &f)
{
    cmd->add_option("--config", f.config, "configuration file (JSON)")->required();
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
}

void add_solver_flags(CLI::App *cmd, rodnet::app::Flags &f)
{
    cmd->add_option("--seed", f.seed, "seed for perturbed initialization");
    cmd->add_option("--init", f.init, "straight | perturbed:AMP");
    cmd->add_option("--segments", f.segments, "segments per rod (overrides config)");
    cmd->add_flag("--allow-unbalanced", f.allow_unbalanced, "skip the junction force balance check");
}

} // namespace

int main(int argc, char **argv)
{
    using namespace rodnet::app;
    Flags flags;

    CLI::App app{"rodnet: equilibria of elastic rods joined at a single junction"};
    app.require_subcommand(1);

    auto *section = app.add_subcommand("section", "cross-section stiffness H");
    add_common(section, flags);

    auto *solve = app.add_subcommand("solve", "minimize the energy and write the equilibrium report");
    add_common(solve, flags);
    add_solver_flags(solve, flags);
    solve->add_flag("--emit-plot-data", flags.emit_plot_data, "also write plot_data.csv");

    auto *verify = app.add_subcommand("verify", "recompute residuals of a stored solution");
    add_common(verify, flags);
    add_solver_flags(verify, flags);
    verify->add_option("--solution", flags.solution, "directory holding report.json and rod CSVs")->required();

    auto *linref = app.add_subcommand("linref", "linearized reference solution");
    linref->group("");
    add_common(linref, flags);
    add_solver_flags(linref, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        std::cerr << app.help();
        return usage_or_io;
    }

    if (*section)
        return run_section(flags, std::cerr);
    if (*solve)
        return run_solve(flags, std::cerr);
    if (*verify)
        return run_verify(flags, std::cerr);
    return run_linref(flags, std::cerr);
}
