#include "robinp/cli.hpp"

#include "robinp/errors.hpp"
#include "robinp/io.hpp"

#include <CLI11.hpp>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

namespace robinp {

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

/// Advisory lock held for the lifetime of a run; released by the kernel on exit.
class DirectoryLock {
public:
    explicit DirectoryLock(const std::filesystem::path& dir) {
        const auto path = dir / ".robinp.lock";
        fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0644);
        if (fd_ < 0) throw IoError("cannot create lock file " + path.string());
        if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(fd_);
            fd_ = -1;
            throw IoError("output directory " + dir.string() + " is in use by another run");
        }
    }
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;
    ~DirectoryLock() {
        if (fd_ >= 0) ::close(fd_);
    }

private:
    int fd_ = -1;
};

struct Context {
    RunConfig config;
    std::filesystem::path out_dir;
    RunLog log;
    std::ostream& out;
    std::ostream& err;
};

std::filesystem::path resolve_output(const RunConfig& config, const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("ROBINP_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
    return config.output.directory;
}

void finish(Context& ctx, const std::string& phase, bool ok, const std::string& message) {
    RunLog::Fields f;
    f.phase = phase + (ok ? ":done" : ":failed");
    f.message = std::string("verdict=") + (ok ? "ok" : "failure") + (message.empty() ? "" : " " + message);
    ctx.log.record(f);
}

int cmd_eigen(Context& ctx) {
    const auto mesh = ctx.config.build_mesh();
    const auto spec = ctx.config.build_problem(mesh);
    const EigenPair pair = principal_eigenpair(spec, ctx.config.eigen);

    ctx.out << "lambda1 = " << format_double(pair.lambda1) << '\n'
            << "residual = " << format_double(pair.residual_norm) << '\n'
            << "iterations = " << pair.iterations << '\n'
            << "converged = " << (pair.converged ? "true" : "false") << '\n';
    write_field_csv(ctx.out_dir / "u1.csv", pair.u1);
    {
        std::ofstream os(ctx.out_dir / "eigen.txt");
        os << "lambda1=" << format_double(pair.lambda1) << "\nresidual=" << format_double(pair.residual_norm)
           << "\niterations=" << pair.iterations << "\nconverged=" << (pair.converged ? 1 : 0) << '\n';
    }
    RunLog::Fields f;
    f.phase = "eigen";
    f.residual = pair.residual_norm;
    f.min_u = pair.u1.min();
    f.max_u = pair.u1.max();
    f.message = "lambda1=" + format_double(pair.lambda1);
    ctx.log.record(f);

    if (!pair.converged) {
        ctx.err << "eigen: iteration budget exhausted, residual " << format_double(pair.residual_norm) << '\n';
        finish(ctx, "eigen", false, "not converged");
        return kFailure;
    }
    finish(ctx, "eigen", true, "lambda1=" + format_double(pair.lambda1));
    return kOk;
}

int cmd_solve_aux(Context& ctx, double epsilon, const std::string& init_path) {
    const auto mesh = ctx.config.build_mesh();
    const auto spec = ctx.config.build_problem(mesh);
    const AuxiliaryProblem aux{spec, ctx.config.build_reaction(), epsilon, ctx.config.build_e(mesh)};
    const DiscreteField init =
        init_path.empty() ? DiscreteField::constant(mesh, 1.0) : read_field_csv(std::filesystem::path(init_path), mesh);

    try {
        const Solution sol = epsilon > 0.0 ? solve_auxiliary(aux, init, ctx.config.solver)
                                           : solve_limit(aux, init, ctx.config.solver);
        ctx.out << "epsilon = " << format_double(epsilon) << '\n'
                << "residual = " << format_double(sol.residual_norm) << '\n'
                << "min_u = " << format_double(sol.min_value) << '\n'
                << "max_u = " << format_double(sol.max_value) << '\n'
                << "picard_iters = " << sol.picard_iters << '\n'
                << "newton_iters = " << sol.newton_iters_total << '\n';
        write_field_csv(ctx.out_dir / "u.csv", sol.u);
        RunLog::Fields f;
        f.phase = "solve-aux";
        f.epsilon = epsilon;
        f.residual = sol.residual_norm;
        f.min_u = sol.min_value;
        f.max_u = sol.max_value;
        ctx.log.record(f);
        finish(ctx, "solve-aux", true, "");
        return kOk;
    } catch (const SolverError& e) {
        ctx.err << "solve-aux: " << to_string(e.kind()) << ": " << e.what() << '\n';
        if (e.last_iterate().size() == mesh->num_nodes()) {
            bool finite = true;
            for (double v : e.last_iterate()) finite = finite && std::isfinite(v);
            if (finite) write_field_csv(ctx.out_dir / "u_last.csv", DiscreteField(mesh, e.last_iterate()));
        }
        finish(ctx, "solve-aux", false, to_string(e.kind()));
        return kFailure;
    }
}

int cmd_continue(Context& ctx) {
    const auto& cfg = ctx.config;
    const auto mesh = cfg.build_mesh();
    const auto spec = cfg.build_problem(mesh);
    const auto reaction = cfg.build_reaction();
    const auto e = cfg.build_e(mesh);

    ContinuationOptions opts;
    opts.solver = cfg.solver;
    opts.eigen = cfg.eigen;
    opts.grid = cfg.check.grid;
    opts.polish = cfg.schedule.polish;
    opts.on_record = [&ctx](const ContinuationRecord& r) {
        RunLog::Fields f;
        f.phase = "continue";
        f.epsilon = r.epsilon;
        f.residual = r.residual;
        f.min_u = r.min_u;
        f.max_u = r.max_u;
        f.picone = r.picone_integral;
        f.message = std::string("step=") + std::to_string(r.step) + " flag=" + to_string(r.collapse_flag);
        ctx.log.record(f);
    };

    const ContinuationTrace trace = continuation_run(spec, reaction, e, cfg.build_schedule(), opts);
    write_trace_csv(ctx.out_dir / "trace.csv", trace);
    write_field_csv(ctx.out_dir / "u1.csv", trace.eigen.u1);
    if (trace.final && cfg.output.write_fields) write_field_csv(ctx.out_dir / "u_final.csv", trace.final->u);

    ctx.out << "lambda1 = " << format_double(trace.eigen.lambda1) << '\n'
            << "records = " << trace.records.size() << '\n'
            << "status = " << to_string(trace.status) << '\n'
            << "c1_bound = " << format_double(trace.c1_bound) << '\n';
    if (!trace.records.empty()) {
        const auto& last = trace.records.back();
        ctx.out << "xi_star = " << format_double(last.xi_star) << '\n'
                << "collapse_flag = " << to_string(last.collapse_flag) << '\n';
    }
    if (trace.final) ctx.out << "final_residual = " << format_double(trace.original_residual) << '\n';

    if (trace.status != ContinuationStatus::Completed) {
        ctx.err << "continue: " << to_string(trace.status) << ": " << trace.message << '\n';
        finish(ctx, "continue", false, std::string(to_string(trace.status)) + ": " + trace.message);
        return kFailure;
    }
    finish(ctx, "continue", true, to_string(trace.status));
    return kOk;
}

void print_report(std::ostream& out, const HypothesisReport& r, const std::string& bound_name) {
    double lo = r.sampled_bound.empty() ? 0.0 : r.sampled_bound.front();
    double hi = lo;
    for (double v : r.sampled_bound) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    out << "H(f)(" << r.id << ") " << (r.pass ? "PASS" : "FAIL") << ' ' << bound_name << "=[" << format_double(lo) << ", "
        << format_double(hi) << ']';
    if (!r.pass) {
        out << " witness: node=" << r.witness.node << " x=" << format_double(r.witness.x)
            << " |y|=" << format_double(std::hypot(r.witness.y[0], r.witness.y[1]))
            << " margin=" << format_double(r.witness.margin);
    }
    if (!r.detail.empty()) out << " (" << r.detail << ')';
    out << '\n';
}

int cmd_check_f(Context& ctx) {
    const auto& cfg = ctx.config;
    const auto mesh = cfg.build_mesh();
    const auto spec = cfg.build_problem(mesh);
    const auto reaction = cfg.build_reaction();
    const EigenPair pair = principal_eigenpair(spec, cfg.eigen);

    const auto growth = check_growth(reaction, spec.p, *mesh, cfg.check.grid);
    const auto limsup = check_limsup_at_infinity(reaction, spec.p, pair.lambda1, *mesh, cfg.check.grid);
    const auto liminf = check_liminf_at_zero(reaction, spec.p, pair.lambda1, cfg.check.M, *mesh, cfg.check.grid);

    ctx.out << "lambda1 = " << format_double(pair.lambda1) << '\n';
    print_report(ctx.out, growth, "a");
    print_report(ctx.out, limsup, "theta");
    print_report(ctx.out, liminf, "eta_M");

    {
        std::ofstream os(ctx.out_dir / "check_f.csv");
        os << "node_id,a,theta,eta_M\n";
        for (std::size_t i = 0; i < mesh->num_nodes(); ++i) {
            os << i << ',' << format_double(growth.sampled_bound.at(i)) << ','
               << format_double(limsup.sampled_bound.at(i)) << ',' << format_double(liminf.sampled_bound.at(i))
               << '\n';
        }
    }

    std::string failed;
    for (const auto* r : {&growth, &limsup, &liminf}) {
        if (!r->pass) failed += (failed.empty() ? "" : ",") + r->id;
        RunLog::Fields f;
        f.phase = "check-f";
        f.message = "hypothesis=" + r->id + (r->pass ? " pass" : " fail");
        ctx.log.record(f);
    }
    if (!failed.empty()) {
        ctx.err << "check-f: hypotheses failed: " << failed << '\n';
        finish(ctx, "check-f", false, "failed=" + failed);
        return kFailure;
    }
    finish(ctx, "check-f", true, "all hypotheses pass");
    return kOk;
}

int cmd_picone(Context& ctx, const std::string& u1_path, const std::string& u_path) {
    const auto mesh = ctx.config.build_mesh();
    const auto spec = ctx.config.build_problem(mesh);
    const DiscreteField u1 = read_field_csv(std::filesystem::path(u1_path), mesh);
    const DiscreteField u = read_field_csv(std::filesystem::path(u_path), mesh);

    std::vector<double> density;
    try {
        density = picone_density(spec, u1, u);
    } catch (const PositivityRequired& e) {
        ctx.err << "picone: " << e.what() << '\n';
        finish(ctx, "picone", false, "u not strictly positive");
        return kFailure;
    }
    double integral = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    std::size_t worst = 0;
    for (std::size_t k = 0; k < density.size(); ++k) {
        integral += mesh->element_measure(k) * density[k];
        if (density[k] < lo) {
            lo = density[k];
            worst = k;
        }
    }
    {
        std::ofstream os(ctx.out_dir / "picone_density.csv");
        os << "element_id,density\n";
        for (std::size_t k = 0; k < density.size(); ++k) os << k << ',' << format_double(density[k]) << '\n';
    }
    const bool ok = lo >= -1e-12;
    ctx.out << "integral = " << format_double(integral) << '\n'
            << "min_pointwise = " << format_double(lo) << " (element " << worst << ")\n"
            << "quadrature_points = " << density.size() << '\n'
            << "nonnegative = " << (ok ? "true" : "false") << '\n';
    RunLog::Fields f;
    f.phase = "picone";
    f.picone = integral;
    f.min_u = u.min();
    f.max_u = u.max();
    ctx.log.record(f);
    if (!ok) {
        ctx.err << "picone: negative density " << format_double(lo) << " at element " << worst << '\n';
        finish(ctx, "picone", false, "negative density");
        return kFailure;
    }
    finish(ctx, "picone", true, "");
    return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Robin p-Laplacian solver with convection reactions", "robinp"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_flag;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--output", output_flag, "output directory (overrides config and ROBINP_OUTPUT_DIR)");
    };

    auto* eigen = app.add_subcommand("eigen", "principal Robin eigenpair");
    add_common(eigen);

    double epsilon = 1.0;
    std::string init_path;
    auto* aux = app.add_subcommand("solve-aux", "solve the perturbed problem at one epsilon");
    add_common(aux);
    aux->add_option("-e,--epsilon", epsilon, "perturbation parameter (0 solves the limit problem)")
        ->check(CLI::NonNegativeNumber);
    aux->add_option("--init", init_path, "initial field CSV")->check(CLI::ExistingFile);

    auto* cont = app.add_subcommand("continue", "epsilon continuation with collapse monitoring");
    add_common(cont);

    auto* check = app.add_subcommand("check-f", "audit the reaction hypotheses");
    add_common(check);

    std::string u1_path;
    std::string u_path;
    auto* picone = app.add_subcommand("picone", "Picone density of two fields");
    add_common(picone);
    picone->add_option("--u1", u1_path, "eigenfunction CSV")->required()->check(CLI::ExistingFile);
    picone->add_option("--u", u_path, "positive field CSV")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();

    RunConfig config;
    std::filesystem::path out_dir;
    try {
        config = load_config(config_path);
        out_dir = resolve_output(config, output_flag);
        std::filesystem::create_directories(out_dir);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "cannot create output directory: " << e.what() << '\n';
        return kUsage;
    }

    std::optional<DirectoryLock> lock;
    std::optional<Context> ctx;
    try {
        lock.emplace(out_dir);
        ctx.emplace(Context{std::move(config), out_dir, RunLog(out_dir / "run.log"), out, err});
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    RunLog::Fields start;
    start.phase = name + ":start";
    start.message = "config=" + config_path;
    ctx->log.record(start);

    try {
        if (name == "eigen") return cmd_eigen(*ctx);
        if (name == "solve-aux") return cmd_solve_aux(*ctx, epsilon, init_path);
        if (name == "continue") return cmd_continue(*ctx);
        if (name == "check-f") return cmd_check_f(*ctx);
        return cmd_picone(*ctx, u1_path, u_path);
    } catch (const IoError& e) {
        err << name << ": " << e.what() << '\n';
        finish(*ctx, name, false, e.what());
        return kUsage;
    } catch (const InvalidArgument& e) {
        err << name << ": " << e.what() << '\n';
        finish(*ctx, name, false, e.what());
        return kUsage;
    } catch (const Error& e) {
        err << name << ": " << e.what() << '\n';
        finish(*ctx, name, false, e.what());
        return kFailure;
    }
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace robinp
