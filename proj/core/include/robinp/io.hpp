#pragma once

#include "robinp/eigenproblem.hpp"
#include "robinp/reaction.hpp"
#include "robinp/solver.hpp"

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>

namespace robinp {

struct MeshConfig {
    /// "interval" or "rectangle".
    std::string kind = "interval";
    double a = 0.0;
    double b = 1.0;
    std::size_t n = 64;
    double lx = 1.0;
    double ly = 1.0;
    std::size_t nx = 16;
    std::size_t ny = 16;
};

struct ProblemConfig {
    double p = 2.0;
    double beta = 0.0;
    /// Per-node beta as a field CSV; overrides the constant.
    std::filesystem::path beta_file;
    double delta = 0.0;
    double e = 1.0;
    std::filesystem::path e_file;
};

struct ReactionConfig {
    /// "example", "zero" or "linear".
    std::string name = "zero";
    ExampleReactionParams example;
    double coefficient = 0.0;
};

struct ScheduleConfig {
    double start = 1.0;
    double ratio = 0.5;
    int steps = 21;
    bool polish = true;
};

struct CheckConfig {
    SampleGrid grid;
    /// Gradient bound M for the small-x hypothesis.
    double M = 1e3;
};

struct OutputConfig {
    std::filesystem::path directory = "robinp_out";
    bool write_fields = true;
};

/// Parsed and validated run configuration.
struct RunConfig {
    MeshConfig mesh;
    ProblemConfig problem;
    ReactionConfig reaction;
    SolverOptions solver;
    ScheduleConfig schedule;
    EigenOptions eigen;
    CheckConfig check;
    OutputConfig output;

    [[nodiscard]] MeshPtr build_mesh() const;
    [[nodiscard]] ProblemSpec build_problem(const MeshPtr& mesh) const;
    [[nodiscard]] ReactionSpec build_reaction() const;
    [[nodiscard]] DiscreteField build_e(const MeshPtr& mesh) const;
    [[nodiscard]] EpsilonSchedule build_schedule() const;
};

/// Parses the line-based `section.key = value` format (`#` starts a comment).
/// Unknown keys are rejected. Relative file paths resolve against base_dir.
/// Throws ConfigError (Parse with a line number, or Validation with the field path).
[[nodiscard]] RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Field CSV with header `node_id,x[,y],u`, 17 significant digits.
void write_field_csv(std::ostream& out, const DiscreteField& field);
void write_field_csv(const std::filesystem::path& path, const DiscreteField& field);
[[nodiscard]] DiscreteField read_field_csv(std::istream& in, const MeshPtr& mesh);
[[nodiscard]] DiscreteField read_field_csv(const std::filesystem::path& path, const MeshPtr& mesh);

/// `step,epsilon,residual,min_u,max_u,max_grad,picone_integral,collapse_flag`.
void write_trace_csv(std::ostream& out, const ContinuationTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const ContinuationTrace& trace);

/// Shortest round-trip text for a double (17 significant digits).
[[nodiscard]] std::string format_double(double v);

/// Append-only log of `key=value` records, one per line.
class RunLog {
public:
    RunLog() = default;
    explicit RunLog(const std::filesystem::path& path);

    struct Fields {
        std::string phase;
        double epsilon = std::numeric_limits<double>::quiet_NaN();
        double residual = std::numeric_limits<double>::quiet_NaN();
        double min_u = std::numeric_limits<double>::quiet_NaN();
        double max_u = std::numeric_limits<double>::quiet_NaN();
        double picone = std::numeric_limits<double>::quiet_NaN();
        std::string message;
    };

    void record(const Fields& fields);
    [[nodiscard]] static std::string format(const Fields& fields, std::string_view timestamp);

private:
    std::ofstream out_;
};

}  // namespace robinp
