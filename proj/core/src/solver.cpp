#include "robinp/solver.hpp"

#include "linear_solve.hpp"
#include "robinp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace robinp {

namespace {

using Vector = std::vector<double>;

double l2(std::span<const double> v) { return std::sqrt(detail::dot(v, v)); }

double max_gradient(const ElementGradients& grads) {
    double m = 0.0;
    for (const Vec2& g : grads) m = std::max(m, std::hypot(g[0], g[1]));
    return m;
}

class AuxiliarySolver {
public:
    AuxiliarySolver(const AuxiliaryProblem& aux, const SolverOptions& opts) : aux_(aux), opts_(opts) {}

    Solution run(const DiscreteField& init) {
        const MeshPtr& mesh = aux_.problem.mesh;
        Vector u(init.values().begin(), init.values().end());
        int picard = 0;
        bool converged = false;

        while (picard < opts_.picard_max_iter) {
            ++picard;
            const DiscreteField current(mesh, u);
            const ElementGradients y = element_gradients(current);
            if (detail::max_abs(v_residual(aux_, current, y)) <= opts_.newton_tol) {
                converged = true;
                break;
            }
            Vector w = newton(u, y);
            const DiscreteField inner(mesh, w);
            if (detail::max_abs(true_residual(inner)) <= opts_.newton_tol) {
                u = std::move(w);
                converged = true;
                break;
            }
            double step = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double next = (1.0 - opts_.relaxation) * u[i] + opts_.relaxation * w[i];
                step = std::max(step, std::abs(next - u[i]));
                u[i] = next;
            }
            if (step <= opts_.picard_tol &&
                detail::max_abs(true_residual(DiscreteField(mesh, u))) <= 10.0 * opts_.newton_tol) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            std::ostringstream os;
            os << "Picard iteration did not converge in " << opts_.picard_max_iter << " iterations (eps="
               << aux_.epsilon << ")";
            throw SolverError(SolverFailure::PicardNotConverged, os.str(), u);
        }

        Solution sol;
        sol.u = DiscreteField(mesh, u);
        sol.epsilon = aux_.epsilon;
        sol.picard_iters = picard;
        sol.newton_iters_total = newton_iters_;
        const ElementGradients grads = element_gradients(sol.u);
        sol.residual_norm = detail::max_abs(v_residual(aux_, sol.u, grads));
        sol.min_value = sol.u.min();
        sol.max_value = sol.u.max();
        sol.max_gradient_norm = max_gradient(grads);
        sol.negative_part_norm = std::max(0.0, -sol.min_value);
        sol.interior_positive = sol.min_value > 0.0;
        if (sol.negative_part_norm > opts_.negative_part_tol * std::max(1.0, sol.u.max_abs())) {
            std::ostringstream os;
            os << "solution has a negative part " << sol.negative_part_norm << " above tolerance (eps=" << aux_.epsilon
               << ")";
            throw SolverError(SolverFailure::PositivityViolated, os.str(), u);
        }
        return sol;
    }

private:
    Vector true_residual(const DiscreteField& u) const { return v_residual(aux_, u, element_gradients(u)); }

    Vector newton(const Vector& start, const ElementGradients& y) {
        try {
            return damped_newton(start, y);
        } catch (const SolverError& e) {
            if (e.kind() != SolverFailure::NewtonDiverged) throw;
            return pseudo_transient(start, y, e.what());
        }
    }

    Vector solve_or_throw(const SparseMatrix& m, const Vector& rhs, const Vector& u) const {
        try {
            return detail::sparse_solve(m, rhs);
        } catch (const LinearSolveFailed& e) {
            throw SolverError(SolverFailure::LinearSolveFailed, e.what(), u);
        }
    }

    // Pseudo-time metric G = M + L^2 S (lumped mass, P1 stiffness, L the domain
    // length scale). The S part keeps the step size independent of h where the
    // p > 2 flux Jacobian degenerates at zero gradient.
    const SparseMatrix& metric() {
        if (metric_.size() == 0) {
            ProblemSpec linear = aux_.problem;
            linear.p = 2.0;
            linear.delta = 0.0;
            const Mesh& mesh = *linear.mesh;
            const std::vector<double> zero(mesh.num_nodes(), 0.0);
            const double scale = std::pow(mesh.domain_measure(), 2.0 / static_cast<double>(mesh.dim()));
            metric_ = scale * a_jacobian(linear, zero);
            const auto& mass = mesh.lumped_mass();
            for (std::size_t i = 0; i < mass.size(); ++i) {
                metric_.coeffRef(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += mass[i];
            }
        }
        return metric_;
    }

    // Backward Euler on G du/dt = -r(u) with switched-evolution-relaxation steps.
    // Stationary points are zeros of r only, so unlike the L2 merit this cannot
    // stall at the kink of the truncated reaction.
    Vector pseudo_transient(Vector u, const ElementGradients& y, const std::string& why) {
        const MeshPtr& mesh = aux_.problem.mesh;
        const SparseMatrix& g = metric();
        Vector r = v_residual(aux_, DiscreteField(mesh, u), y);
        double dt = opts_.ptc_dt0;
        for (int it = 0; it < opts_.ptc_max_iter; ++it) {
            if (detail::max_abs(r) <= opts_.newton_tol) return u;
            const SparseMatrix jac = v_jacobian(aux_, DiscreteField(mesh, u), y);
            Vector rhs(r.size());
            for (std::size_t i = 0; i < r.size(); ++i) rhs[i] = -r[i];
            const double norm0 = l2(r);
            bool accepted = false;
            for (int h = 0; h <= opts_.armijo_max_halvings; ++h) {
                const SparseMatrix shifted = jac + g / dt;
                Vector du;
                try {
                    du = solve_or_throw(shifted, rhs, u);
                } catch (const SolverError&) {
                    dt *= 0.25;
                    continue;
                }
                Vector trial(u.size());
                for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + du[i];
                bool finite = true;
                for (double v : trial) finite = finite && std::isfinite(v);
                if (!finite) {
                    dt *= 0.25;
                    continue;
                }
                Vector rt = v_residual(aux_, DiscreteField(mesh, trial), y);
                const double norm1 = l2(rt);
                if (!std::isfinite(norm1) || norm1 > 10.0 * norm0) {
                    dt *= 0.25;
                    continue;
                }
                dt = std::min(dt * std::clamp(norm0 / std::max(norm1, 1e-300), 0.25, 4.0), 1e12);
                u.swap(trial);
                r.swap(rt);
                accepted = true;
                break;
            }
            ++newton_iters_;
            if (!accepted) break;
        }
        if (detail::max_abs(r) <= opts_.newton_tol) return u;
        std::ostringstream os;
        os << why << "; pseudo-transient fallback ended at residual " << detail::max_abs(r);
        throw SolverError(SolverFailure::NewtonDiverged, os.str(), u);
    }

    Vector damped_newton(Vector u, const ElementGradients& y) {
        const MeshPtr& mesh = aux_.problem.mesh;
        Vector r = v_residual(aux_, DiscreteField(mesh, u), y);
        for (int it = 0; it < opts_.newton_max_iter; ++it) {
            if (detail::max_abs(r) <= opts_.newton_tol) return u;
            const SparseMatrix jac = v_jacobian(aux_, DiscreteField(mesh, u), y);
            Vector rhs(r.size());
            for (std::size_t i = 0; i < r.size(); ++i) rhs[i] = -r[i];
            const Vector du = solve_or_throw(jac, rhs, u);
            const double norm0 = l2(r);
            double t = 1.0;
            bool accepted = false;
            Vector trial(u.size());
            for (int h = 0; h <= opts_.armijo_max_halvings; ++h, t *= opts_.armijo_factor) {
                for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + t * du[i];
                Vector rt = v_residual(aux_, DiscreteField(mesh, trial), y);
                if (l2(rt) <= (1.0 - opts_.armijo_slope * t) * norm0) {
                    accepted = true;
                    u.swap(trial);
                    r.swap(rt);
                    break;
                }
            }
            if (!accepted) {
                std::ostringstream os;
                os << "Newton line search stalled at residual " << detail::max_abs(r) << " (eps=" << aux_.epsilon
                   << ")";
                throw SolverError(SolverFailure::NewtonDiverged, os.str(), u);
            }
            ++newton_iters_;
        }
        if (detail::max_abs(r) <= opts_.newton_tol) return u;
        std::ostringstream os;
        os << "Newton did not converge in " << opts_.newton_max_iter << " iterations (residual "
           << detail::max_abs(r) << ")";
        throw SolverError(SolverFailure::NewtonDiverged, os.str(), u);
    }

    const AuxiliaryProblem& aux_;
    const SolverOptions& opts_;
    int newton_iters_ = 0;
    SparseMatrix metric_;
};

DiscreteField on_mesh(const AuxiliaryProblem& aux, const DiscreteField& init) {
    if (init.size() != aux.problem.mesh->num_nodes()) {
        throw InvalidArgument("solve_auxiliary: initial field does not match the mesh");
    }
    return init.mesh_ptr() == aux.problem.mesh ? init
                                               : DiscreteField(aux.problem.mesh, {init.values().begin(), init.values().end()});
}

ContinuationRecord make_record(int step, const Solution& s) {
    ContinuationRecord r;
    r.step = step;
    r.epsilon = s.epsilon;
    r.residual = s.residual_norm;
    r.min_u = s.min_value;
    r.max_u = s.max_value;
    r.max_grad = s.max_gradient_norm;
    r.negative_part = s.negative_part_norm;
    r.picard_iters = s.picard_iters;
    r.newton_iters = s.newton_iters_total;
    return r;
}

bool trending_to_zero(const std::vector<ContinuationRecord>& records, int window, double min_slope) {
    if (window < 2 || records.size() < static_cast<std::size_t>(window)) return false;
    const std::size_t first = records.size() - static_cast<std::size_t>(window);
    for (std::size_t k = first + 1; k < records.size(); ++k) {
        if (!(records[k].max_u < records[k - 1].max_u)) return false;
    }
    const auto& a = records[first];
    const auto& b = records.back();
    if (!(a.max_u > 0.0) || !(b.max_u > 0.0) || !(a.epsilon > 0.0) || !(b.epsilon > 0.0)) return false;
    const double slope = std::log(b.max_u / a.max_u) / std::log(b.epsilon / a.epsilon);
    return slope >= min_slope;
}

}  // namespace

const char* to_string(SolverFailure kind) noexcept {
    switch (kind) {
        case SolverFailure::NewtonDiverged: return "newton-diverged";
        case SolverFailure::PicardNotConverged: return "picard-not-converged";
        case SolverFailure::PositivityViolated: return "positivity-violated";
        case SolverFailure::LinearSolveFailed: return "linear-solve-failed";
    }
    return "unknown";
}

const char* to_string(ContinuationStatus s) noexcept {
    switch (s) {
        case ContinuationStatus::Completed: return "completed";
        case ContinuationStatus::CollapseDetected: return "collapse-detected";
        case ContinuationStatus::SolverFailed: return "solver-failed";
    }
    return "unknown";
}

void SolverOptions::validate() const {
    if (!(newton_tol > 0.0) || !(picard_tol > 0.0) || !(negative_part_tol > 0.0)) {
        throw InvalidArgument("SolverOptions: tolerances must be positive");
    }
    if (!(relaxation > 0.0 && relaxation <= 1.0)) throw InvalidArgument("SolverOptions: relaxation must lie in (0, 1]");
    if (newton_max_iter < 1 || picard_max_iter < 1) throw InvalidArgument("SolverOptions: iteration limits must be >= 1");
    if (!(armijo_factor > 0.0 && armijo_factor < 1.0)) throw InvalidArgument("SolverOptions: armijo factor must lie in (0, 1)");
    if (!(armijo_slope > 0.0 && armijo_slope < 1.0)) throw InvalidArgument("SolverOptions: armijo slope must lie in (0, 1)");
    if (armijo_max_halvings < 0) throw InvalidArgument("SolverOptions: armijo halvings must be >= 0");
    if (!(ptc_dt0 > 0.0) || ptc_max_iter < 0) throw InvalidArgument("SolverOptions: pseudo-transient settings invalid");
}

double Solution::c1_proxy() const noexcept { return u.max_abs() + max_gradient_norm; }

Solution solve_auxiliary(const AuxiliaryProblem& aux, const DiscreteField& init, const SolverOptions& opts) {
    if (!(aux.epsilon > 0.0)) throw InvalidArgument("solve_auxiliary: epsilon must be positive");
    return solve_limit(aux, init, opts);
}

Solution solve_limit(const AuxiliaryProblem& aux, const DiscreteField& init, const SolverOptions& opts) {
    aux.validate();
    opts.validate();
    AuxiliarySolver solver(aux, opts);
    return solver.run(on_mesh(aux, init));
}

SolutionDiagnostics check_solution(const ProblemSpec& problem, const ReactionSpec& reaction, const DiscreteField& u,
                                   double epsilon, const std::optional<DiscreteField>& e) {
    AuxiliaryProblem aux{problem, reaction, epsilon,
                         e ? *e : DiscreteField::constant(problem.mesh, 1.0)};
    const DiscreteField field = u.mesh_ptr() == problem.mesh ? u
                                                             : DiscreteField(problem.mesh, {u.values().begin(), u.values().end()});
    const Vector r = v_residual(aux, field, element_gradients(field), ReactionForm::Original);
    SolutionDiagnostics d;
    const Mesh& mesh = *problem.mesh;
    for (std::size_t i = 0; i < r.size(); ++i) {
        double& slot = mesh.is_boundary_node(i) ? d.boundary_residual : d.interior_residual;
        slot = std::max(slot, std::abs(r[i]));
    }
    d.min_value = field.min();
    d.max_value = field.max();
    d.negative_part = std::max(0.0, -d.min_value);
    return d;
}

EpsilonSchedule EpsilonSchedule::geometric(double start, double ratio, int steps) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("EpsilonSchedule: ratio must lie in (0, 1)");
    if (steps < 1) throw InvalidArgument("EpsilonSchedule: need at least one step");
    EpsilonSchedule s;
    double eps = start;
    for (int k = 0; k < steps; ++k) {
        s.values.push_back(eps);
        eps *= ratio;
    }
    s.validate();
    return s;
}

void EpsilonSchedule::validate() const {
    if (values.empty()) throw InvalidArgument("EpsilonSchedule: empty schedule");
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!(values[k] > 0.0 && values[k] <= 1.0)) throw InvalidArgument("EpsilonSchedule: values must lie in (0, 1]");
        if (k > 0 && !(values[k] < values[k - 1])) throw InvalidArgument("EpsilonSchedule: values must strictly decrease");
    }
}

ContinuationTrace continuation_run(const ProblemSpec& problem, const ReactionSpec& reaction, const DiscreteField& e,
                                   const EpsilonSchedule& schedule, const ContinuationOptions& opts) {
    problem.validate();
    schedule.validate();
    opts.solver.validate();

    ContinuationTrace trace;
    trace.eigen = opts.eigenpair ? *opts.eigenpair : principal_eigenpair(problem, opts.eigen);
    trace.original_residual = std::numeric_limits<double>::quiet_NaN();
    const double p = problem.p;

    AuxiliaryProblem aux{problem, reaction, schedule.values.front(), e};
    DiscreteField current = opts.initial ? *opts.initial : DiscreteField::constant(problem.mesh, 1.0);

    bool trend_fired = false;
    const auto append = [&](ContinuationRecord rec, const DiscreteField& u) {
        trace.max_value_bound = std::max(trace.max_value_bound, rec.max_u);
        trace.max_gradient_bound = std::max(trace.max_gradient_bound, rec.max_grad);
        trace.c1_bound = std::max(trace.c1_bound, rec.c1_proxy());
        trace.eta_M = check_liminf_at_zero(reaction, p, trace.eigen.lambda1, trace.c1_bound, *problem.mesh, opts.grid)
                          .sampled_bound;
        const PiconeReport report = collapse_measure(problem, trace.eigen, u, trace.eta_M, opts.collapse);
        rec.picone_integral = report.integral;
        rec.xi_star = report.xi_star;
        rec.collapse_flag = report.collapse_flag;
        trace.records.push_back(rec);
        // A decaying trend marks the record itself, so traces and logs agree with the status.
        if (rec.collapse_flag == CollapseVerdict::Healthy && rec.epsilon > 0.0 &&
            trending_to_zero(trace.records, opts.trend_window, opts.trend_slope)) {
            rec.collapse_flag = trace.records.back().collapse_flag = CollapseVerdict::CollapseSuspected;
            trend_fired = true;
        }
        if (opts.on_record) opts.on_record(rec);
    };

    for (std::size_t n = 0; n < schedule.values.size(); ++n) {
        aux.epsilon = schedule.values[n];
        Solution sol;
        try {
            sol = solve_auxiliary(aux, current, opts.solver);
        } catch (const SolverError& err) {
            trace.status = ContinuationStatus::SolverFailed;
            trace.message = std::string(to_string(err.kind())) + ": " + err.what();
            return trace;
        }
        current = sol.u;
        append(make_record(static_cast<int>(n), sol), sol.u);
        trace.final = std::move(sol);

        if (trace.records.back().collapse_flag == CollapseVerdict::CollapseSuspected) {
            std::ostringstream os;
            os << "max u=" << trace.records.back().max_u << " at eps=" << aux.epsilon
               << (trend_fired ? " decays with eps" : " below the collapse floor");
            trace.status = ContinuationStatus::CollapseDetected;
            trace.message = os.str();
            return trace;
        }
    }

    if (opts.polish) {
        aux.epsilon = 0.0;
        Solution sol;
        try {
            sol = solve_limit(aux, current, opts.solver);
        } catch (const SolverError& err) {
            trace.status = ContinuationStatus::SolverFailed;
            trace.message = std::string("eps=0 polish: ") + to_string(err.kind()) + ": " + err.what();
            return trace;
        }
        trace.original_residual = check_solution(problem, reaction, sol.u, 0.0, e).residual();
        ContinuationRecord rec = make_record(static_cast<int>(schedule.values.size()), sol);
        rec.residual = trace.original_residual;
        append(rec, sol.u);
        trace.final = std::move(sol);
        if (trace.records.back().collapse_flag == CollapseVerdict::CollapseSuspected) {
            trace.status = ContinuationStatus::CollapseDetected;
            trace.message = "max u below the collapse floor at the eps=0 polish";
            return trace;
        }
    }
    trace.status = ContinuationStatus::Completed;
    trace.message = "completed";
    return trace;
}

}  // namespace robinp
