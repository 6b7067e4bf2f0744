#pragma once

// Configuration ingestion, pipeline orchestration and file output for the
// rodnet command line tool.

#include "rodnet/model.hpp"
#include "rodnet/post.hpp"
#include "rodnet/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rodnet::app {

/// File could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum ExitCode : int { ok = 0, usage_or_io = 1, not_converged = 2, invalid_input = 3 };

struct Thresholds {
    /// Absolute bound on |sum q_i(0)|; defaults to 1e-5 * load scale * max L
    /// (with a floor of 1e-10).
    std::optional<double> junction_couple;
};

struct RunConfig {
    int version = 1;
    NetworkInput network;
    solver::SolverOptions solver;
    Thresholds thresholds;
    std::string output_dir = "out";
    bool emit_plot_data = false;
};

/// Standalone cross-section job ({"version": 1, "section": ..., "material": ..., "mesh_size": ...}).
struct SectionJob {
    SectionInput section;
};

/// Parses a version-1 configuration. Errors are ValidationError with the
/// JSON path of the offending field.
RunConfig parse_config(const std::string &text);
RunConfig load_config(const std::string &path);

/// Either a single section job or the sections of every rod that has one.
std::vector<SectionInput> load_sections(const std::string &path, std::vector<std::size_t> *rod_indices);

/// Canonical JSON form of a configuration: defaults filled in, frames as
/// unit quaternions (w, x, y, z). Parsing the result reproduces the same
/// RunConfig exactly.
std::string normalized_config(const RunConfig &config);

/// "straight" or "perturbed:AMP".
void apply_init_spec(const std::string &spec, solver::SolverOptions &options);
std::string init_spec(const solver::SolverOptions &options);

struct Flags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> init;
    std::optional<int> segments;
    bool allow_unbalanced = false;
    bool emit_plot_data = false;
    int threads = 1;
    std::string solution; ///< verify: directory with report.json and rod CSVs
};

int run_section(const Flags &flags, std::ostream &log);
int run_solve(const Flags &flags, std::ostream &log);
int run_verify(const Flags &flags, std::ostream &log);
int run_linref(const Flags &flags, std::ostream &log);

// Output formats.

std::string format_double(double v); ///< %.17g
std::string section_json(const xsection::SectionStiffness &st);
std::string rod_csv(const post::RodReport &rod);
std::string trace_csv(const solver::SolveTrace &trace);
std::string plot_csv(const post::EquilibriumReport &report);

/// Reads a rod CSV written by rod_csv() and returns the node quaternions.
std::vector<Quat> read_rod_quaternions(const std::string &path);

void write_file(const std::string &path, const std::string &content);
std::string read_file(const std::string &path);

} // namespace rodnet::app
