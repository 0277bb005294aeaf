#include "robinp/io.hpp"

#include "robinp/errors.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace robinp {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
    s = trim(s);
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return !s.empty() && ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        parts.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

[[noreturn]] void invalid(const std::string& field, const std::string& message) {
    throw ConfigError(ConfigError::Kind::Validation, field + ": " + message, 0, field);
}

using Setter = std::function<bool(std::string_view)>;

std::map<std::string, Setter> make_setters(RunConfig& c, const std::filesystem::path& base) {
    const auto real = [](double& slot) { return Setter([&slot](std::string_view v) { return parse_double(v, slot); }); };
    const auto integer = [](int& slot) { return Setter([&slot](std::string_view v) { return parse_int(v, slot); }); };
    const auto count = [](std::size_t& slot) {
        return Setter([&slot](std::string_view v) { return parse_int(v, slot); });
    };
    const auto text = [](std::string& slot) {
        return Setter([&slot](std::string_view v) {
            slot = std::string(v);
            return !slot.empty();
        });
    };
    const auto path = [&base](std::filesystem::path& slot) {
        return Setter([&slot, base](std::string_view v) {
            if (v.empty()) return false;
            std::filesystem::path p{std::string(v)};
            slot = p.is_relative() && !base.empty() ? base / p : p;
            return true;
        });
    };
    const auto flag = [](bool& slot) {
        return Setter([&slot](std::string_view v) {
            if (v == "true" || v == "1" || v == "yes") slot = true;
            else if (v == "false" || v == "0" || v == "no") slot = false;
            else return false;
            return true;
        });
    };

    return {
        {"mesh.kind", text(c.mesh.kind)},
        {"mesh.a", real(c.mesh.a)},
        {"mesh.b", real(c.mesh.b)},
        {"mesh.n", count(c.mesh.n)},
        {"mesh.lx", real(c.mesh.lx)},
        {"mesh.ly", real(c.mesh.ly)},
        {"mesh.nx", count(c.mesh.nx)},
        {"mesh.ny", count(c.mesh.ny)},
        {"problem.p", real(c.problem.p)},
        {"problem.beta", real(c.problem.beta)},
        {"problem.beta_file", path(c.problem.beta_file)},
        {"problem.delta", real(c.problem.delta)},
        {"problem.e", real(c.problem.e)},
        {"problem.e_file", path(c.problem.e_file)},
        {"reaction.name", text(c.reaction.name)},
        {"reaction.eta", real(c.reaction.example.eta)},
        {"reaction.theta", real(c.reaction.example.theta)},
        {"reaction.q", real(c.reaction.example.q)},
        {"reaction.tau", real(c.reaction.example.tau)},
        {"reaction.r", real(c.reaction.example.r)},
        {"reaction.coefficient", real(c.reaction.coefficient)},
        {"solver.newton_tol", real(c.solver.newton_tol)},
        {"solver.newton_max_iter", integer(c.solver.newton_max_iter)},
        {"solver.picard_tol", real(c.solver.picard_tol)},
        {"solver.picard_max_iter", integer(c.solver.picard_max_iter)},
        {"solver.relaxation", real(c.solver.relaxation)},
        {"solver.armijo_factor", real(c.solver.armijo_factor)},
        {"solver.armijo_slope", real(c.solver.armijo_slope)},
        {"solver.armijo_max_halvings", integer(c.solver.armijo_max_halvings)},
        {"solver.negative_part_tol", real(c.solver.negative_part_tol)},
        {"solver.ptc_dt0", real(c.solver.ptc_dt0)},
        {"solver.ptc_max_iter", integer(c.solver.ptc_max_iter)},
        {"schedule.start", real(c.schedule.start)},
        {"schedule.ratio", real(c.schedule.ratio)},
        {"schedule.steps", integer(c.schedule.steps)},
        {"schedule.polish", flag(c.schedule.polish)},
        {"eigen.tol", real(c.eigen.tol)},
        {"eigen.max_iterations", integer(c.eigen.max_iterations)},
        {"check.x_min", real(c.check.grid.x_min)},
        {"check.x_max", real(c.check.grid.x_max)},
        {"check.points_per_decade", integer(c.check.grid.points_per_decade)},
        {"check.y_min", real(c.check.grid.y_min)},
        {"check.y_max", real(c.check.grid.y_max)},
        {"check.tail_tolerance", real(c.check.grid.tail_tolerance)},
        {"check.strict_gap", real(c.check.grid.strict_gap)},
        {"check.M", real(c.check.M)},
        {"output.directory", path(c.output.directory)},
        {"output.write_fields", flag(c.output.write_fields)},
    };
}

void validate(const RunConfig& c) {
    if (c.mesh.kind == "interval") {
        if (!std::isfinite(c.mesh.a) || !std::isfinite(c.mesh.b) || !(c.mesh.a < c.mesh.b)) {
            invalid("mesh.a", "interval requires finite a < b");
        }
        if (c.mesh.n < 1) invalid("mesh.n", "must be >= 1");
    } else if (c.mesh.kind == "rectangle") {
        if (!(c.mesh.lx > 0.0)) invalid("mesh.lx", "must be positive");
        if (!(c.mesh.ly > 0.0)) invalid("mesh.ly", "must be positive");
        if (c.mesh.nx < 1) invalid("mesh.nx", "must be >= 1");
        if (c.mesh.ny < 1) invalid("mesh.ny", "must be >= 1");
    } else {
        invalid("mesh.kind", "must be 'interval' or 'rectangle'");
    }
    if (!(c.problem.p > 1.0) || !std::isfinite(c.problem.p)) invalid("problem.p", "p must exceed 1");
    if (!(c.problem.beta >= 0.0)) invalid("problem.beta", "must be >= 0");
    if (!(c.problem.delta >= 0.0)) invalid("problem.delta", "must be >= 0");
    if (!(c.problem.e > 0.0)) invalid("problem.e", "must be > 0");
    for (const auto& [field, file] : {std::pair{"problem.beta_file", c.problem.beta_file},
                                      std::pair{"problem.e_file", c.problem.e_file}}) {
        if (!file.empty() && !std::filesystem::exists(file)) invalid(field, "file not found: " + file.string());
    }

    const auto& r = c.reaction;
    if (r.name == "example") {
        ExampleReactionParams params = r.example;
        params.p = c.problem.p;
        try {
            params.validate();
        } catch (const Error& e) {
            invalid("reaction", e.what());
        }
    } else if (r.name != "zero" && r.name != "linear") {
        invalid("reaction.name", "must be 'example', 'zero' or 'linear'");
    }

    try {
        c.solver.validate();
    } catch (const Error& e) {
        invalid("solver", e.what());
    }
    if (!(c.schedule.start > 0.0 && c.schedule.start <= 1.0)) invalid("schedule.start", "must lie in (0, 1]");
    if (!(c.schedule.ratio > 0.0 && c.schedule.ratio < 1.0)) invalid("schedule.ratio", "must lie in (0, 1)");
    if (c.schedule.steps < 1) invalid("schedule.steps", "must be >= 1");
    if (c.eigen.max_iterations < 1) invalid("eigen.max_iterations", "must be >= 1");

    const auto& g = c.check.grid;
    if (!(g.x_min > 0.0 && g.x_min < g.x_max)) invalid("check.x_min", "require 0 < x_min < x_max");
    if (!(g.y_min > 0.0 && g.y_min < g.y_max)) invalid("check.y_min", "require 0 < y_min < y_max");
    if (g.points_per_decade < 1) invalid("check.points_per_decade", "must be >= 1");
    if (!(g.tail_tolerance >= 0.0)) invalid("check.tail_tolerance", "must be >= 0");
    if (!(c.check.M >= 0.0)) invalid("check.M", "must be >= 0");
}

void write_row_number(std::ostream& out, double v) { out << format_double(v); }

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    RunConfig config;
    const auto setters = make_setters(config, base_dir);
    std::set<std::string> seen;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(ConfigError::Kind::Parse, "line " + std::to_string(line_no) + ": expected 'section.key = value'",
                              line_no);
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) {
            throw ConfigError(ConfigError::Kind::Parse, "line " + std::to_string(line_no) + ": unknown key '" + key + "'",
                              line_no, key);
        }
        if (!seen.insert(key).second) {
            throw ConfigError(ConfigError::Kind::Parse, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'",
                              line_no, key);
        }
        if (!it->second(value)) {
            throw ConfigError(ConfigError::Kind::Parse,
                              "line " + std::to_string(line_no) + ": bad value '" + std::string(value) + "' for " + key,
                              line_no, key);
        }
    }
    validate(config);
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(ConfigError::Kind::Parse, "cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

MeshPtr RunConfig::build_mesh() const {
    if (mesh.kind == "interval") return build_interval_mesh(mesh.a, mesh.b, mesh.n);
    return build_rectangle_mesh(mesh.lx, mesh.ly, mesh.nx, mesh.ny);
}

ProblemSpec RunConfig::build_problem(const MeshPtr& m) const {
    ProblemSpec spec = make_problem(m, problem.p, problem.beta, problem.delta);
    if (!problem.beta_file.empty()) {
        const DiscreteField beta = read_field_csv(problem.beta_file, m);
        spec.beta.assign(beta.values().begin(), beta.values().end());
        spec.validate();
    }
    return spec;
}

ReactionSpec RunConfig::build_reaction() const {
    if (reaction.name == "example") {
        ExampleReactionParams params = reaction.example;
        params.p = problem.p;
        return example_reaction(params);
    }
    if (reaction.name == "linear") return linear_reaction(reaction.coefficient, problem.p);
    return zero_reaction();
}

DiscreteField RunConfig::build_e(const MeshPtr& m) const {
    if (!problem.e_file.empty()) return read_field_csv(problem.e_file, m);
    return DiscreteField::constant(m, problem.e);
}

EpsilonSchedule RunConfig::build_schedule() const {
    return EpsilonSchedule::geometric(schedule.start, schedule.ratio, schedule.steps);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_field_csv(std::ostream& out, const DiscreteField& field) {
    const Mesh& mesh = field.mesh();
    out << (mesh.dim() == 1 ? "node_id,x,u\n" : "node_id,x,y,u\n");
    for (std::size_t i = 0; i < field.size(); ++i) {
        out << i << ',';
        write_row_number(out, mesh.node(i)[0]);
        if (mesh.dim() == 2) {
            out << ',';
            write_row_number(out, mesh.node(i)[1]);
        }
        out << ',';
        write_row_number(out, field[i]);
        out << '\n';
    }
}

void write_field_csv(const std::filesystem::path& path, const DiscreteField& field) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    write_field_csv(out, field);
    if (!out) throw IoError("write failed: " + path.string());
}

DiscreteField read_field_csv(std::istream& in, const MeshPtr& mesh) {
    std::string line;
    if (!std::getline(in, line) || trim(line).empty()) throw IoError("parse error: empty field file");
    const std::string expected = mesh->dim() == 1 ? "node_id,x,u" : "node_id,x,y,u";
    if (trim(line) != expected) throw IoError("parse error: expected header '" + expected + "'");
    const std::size_t columns = mesh->dim() == 1 ? 3 : 4;

    std::vector<double> values;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto parts = split(trim(line), ',');
        std::size_t id = 0;
        double v = 0.0;
        if (parts.size() != columns || !parse_int(parts[0], id) || !parse_double(parts.back(), v)) {
            throw IoError("parse error: malformed row " + std::to_string(row));
        }
        if (id != values.size()) throw IoError("parse error: node ids must be consecutive from 0 (row " + std::to_string(row) + ")");
        values.push_back(v);
    }
    if (values.size() != mesh->num_nodes()) {
        throw IoError("node-count mismatch: file has " + std::to_string(values.size()) + " nodes, mesh has " +
                      std::to_string(mesh->num_nodes()));
    }
    return DiscreteField(mesh, std::move(values));
}

DiscreteField read_field_csv(const std::filesystem::path& path, const MeshPtr& mesh) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return read_field_csv(in, mesh);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_trace_csv(std::ostream& out, const ContinuationTrace& trace) {
    out << "step,epsilon,residual,min_u,max_u,max_grad,picone_integral,collapse_flag\n";
    for (const auto& r : trace.records) {
        out << r.step << ',' << format_double(r.epsilon) << ',' << format_double(r.residual) << ','
            << format_double(r.min_u) << ',' << format_double(r.max_u) << ',' << format_double(r.max_grad) << ','
            << format_double(r.picone_integral) << ',' << to_string(r.collapse_flag) << '\n';
    }
}

void write_trace_csv(const std::filesystem::path& path, const ContinuationTrace& trace) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    write_trace_csv(out, trace);
}

RunLog::RunLog(const std::filesystem::path& path) : out_(path, std::ios::app) {
    if (!out_) throw IoError("cannot open log " + path.string());
}

std::string RunLog::format(const Fields& f, std::string_view timestamp) {
    std::ostringstream os;
    os << "timestamp=" << timestamp << " phase=" << f.phase;
    const auto num = [&os](const char* key, double v) {
        if (!std::isnan(v)) os << ' ' << key << '=' << format_double(v);
    };
    num("epsilon", f.epsilon);
    num("residual", f.residual);
    num("min_u", f.min_u);
    num("max_u", f.max_u);
    num("picone", f.picone);
    if (!f.message.empty()) {
        std::string msg = f.message;
        for (char& ch : msg) {
            if (ch == '"' || ch == '\n') ch = '\'';
        }
        os << " message=\"" << msg << '"';
    }
    return os.str();
}

void RunLog::record(const Fields& fields) {
    if (!out_.is_open()) return;
    out_ << format(fields, utc_timestamp()) << '\n';
    out_.flush();
}

}  // namespace robinp
