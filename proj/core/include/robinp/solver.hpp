#pragma once

#include "robinp/assembly.hpp"
#include "robinp/eigenproblem.hpp"
#include "robinp/picone.hpp"
#include "robinp/reaction.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace robinp {

struct SolverOptions {
    /// Max-norm of the weak residual accepted by the inner Newton solve.
    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    /// Max-norm of successive Picard iterates.
    double picard_tol = 1e-10;
    int picard_max_iter = 500;
    /// Picard relaxation omega in (0, 1].
    double relaxation = 0.7;
    double armijo_factor = 0.5;
    double armijo_slope = 1e-4;
    int armijo_max_halvings = 30;
    /// Accepted ||u^-||_inf relative to max(max|u|, 1).
    double negative_part_tol = 1e-10;
    /// Pseudo-transient fallback used when the Newton line search stalls:
    /// initial pseudo time step and step budget.
    double ptc_dt0 = 0.1;
    int ptc_max_iter = 2000;

    void validate() const;
};

struct Solution {
    DiscreteField u;
    double epsilon = 0.0;
    /// Max-norm of the residual with the unfrozen gradient.
    double residual_norm = 0.0;
    int picard_iters = 0;
    int newton_iters_total = 0;
    double min_value = 0.0;
    double max_value = 0.0;
    double max_gradient_norm = 0.0;
    /// ||u^-||_inf.
    double negative_part_norm = 0.0;
    /// min_value > 0: the iterate lies in the interior of the positive cone.
    bool interior_positive = false;

    /// Discrete C^1 proxy: max|u| + max_K |Du_K|.
    [[nodiscard]] double c1_proxy() const noexcept;
};

/// Solves V(u) = 0 for eps > 0 by frozen-convection Picard iteration with an
/// inner damped Newton solve. Throws SolverError (with the last iterate) on
/// Newton stall, Picard budget exhaustion, a failed linear solve, or a
/// negative part above tolerance.
[[nodiscard]] Solution solve_auxiliary(const AuxiliaryProblem& aux, const DiscreteField& init,
                                       const SolverOptions& opts = {});

/// The eps = 0 limit problem solved with the same machinery (no eps > 0 requirement).
[[nodiscard]] Solution solve_limit(const AuxiliaryProblem& aux, const DiscreteField& init,
                                   const SolverOptions& opts = {});

struct SolutionDiagnostics {
    /// Max-norm of the weak residual of -Delta_p u - f - eps e over interior rows.
    double interior_residual = 0.0;
    /// Same over boundary rows, where the Robin condition enters.
    double boundary_residual = 0.0;
    double min_value = 0.0;
    double max_value = 0.0;
    double negative_part = 0.0;

    [[nodiscard]] double residual() const noexcept { return std::max(interior_residual, boundary_residual); }
};

/// Residual of the unperturbed equation with forcing eps*e (e = 1 when omitted).
[[nodiscard]] SolutionDiagnostics check_solution(const ProblemSpec& problem, const ReactionSpec& reaction,
                                                 const DiscreteField& u, double epsilon,
                                                 const std::optional<DiscreteField>& e = std::nullopt);

/// Strictly decreasing eps values in (0, 1].
struct EpsilonSchedule {
    std::vector<double> values;

    [[nodiscard]] static EpsilonSchedule geometric(double start = 1.0, double ratio = 0.5, int steps = 21);
    void validate() const;
};

struct ContinuationRecord {
    int step = 0;
    double epsilon = 0.0;
    double residual = 0.0;
    double min_u = 0.0;
    double max_u = 0.0;
    double max_grad = 0.0;
    double negative_part = 0.0;
    int picard_iters = 0;
    int newton_iters = 0;
    double picone_integral = 0.0;
    double xi_star = 0.0;
    CollapseVerdict collapse_flag = CollapseVerdict::Healthy;

    [[nodiscard]] double c1_proxy() const noexcept { return max_u + max_grad; }
};

enum class ContinuationStatus { Completed, CollapseDetected, SolverFailed };

[[nodiscard]] const char* to_string(ContinuationStatus s) noexcept;

struct ContinuationOptions {
    SolverOptions solver;
    EigenOptions eigen;
    /// Reuse a computed eigenpair.
    std::optional<EigenPair> eigenpair;
    CollapseOptions collapse;
    SampleGrid grid;
    /// Start of the first solve; u = 1 when absent.
    std::optional<DiscreteField> initial;
    /// Collapse is declared when max u falls monotonically over this many records
    /// with log-log slope d log(max u) / d log(eps) of at least trend_slope.
    int trend_window = 5;
    double trend_slope = 0.5;
    /// Re-solve with eps = 0 after the schedule.
    bool polish = true;
    std::function<void(const ContinuationRecord&)> on_record;
};

struct ContinuationTrace {
    std::vector<ContinuationRecord> records;
    std::optional<Solution> final;
    /// Running maxima over the records (nondecreasing).
    double max_value_bound = 0.0;
    double max_gradient_bound = 0.0;
    double c1_bound = 0.0;
    ContinuationStatus status = ContinuationStatus::Completed;
    std::string message;
    /// Max-norm residual of the eps = 0 problem at the final field (NaN without polish).
    double original_residual = 0.0;
    EigenPair eigen;
    /// Sampled eta_M field used for xi*.
    std::vector<double> eta_M;
};

/// Solves the auxiliary problem along the schedule with warm starts, recording
/// norm proxies and Picone / collapse diagnostics, then polishes at eps = 0.
/// Solver failures and detected collapse end the trace with the matching status.
[[nodiscard]] ContinuationTrace continuation_run(const ProblemSpec& problem, const ReactionSpec& reaction,
                                                 const DiscreteField& e, const EpsilonSchedule& schedule,
                                                 const ContinuationOptions& opts = {});

}  // namespace robinp
