#pragma once

#include "robinp/assembly.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace robinp {

struct EigenOptions {
    /// Max-norm tolerance on the eigen-residual. Nonpositive selects 1e-8 (p = 2) or 1e-6.
    double tol = -1.0;
    int max_iterations = 100000;
    /// Start field; u = 1 when absent. Only its direction matters.
    std::optional<DiscreteField> initial;
    double armijo_slope = 1e-4;
    double armijo_factor = 0.5;
    int max_halvings = 40;

    [[nodiscard]] double resolved_tol(double p) const noexcept { return tol > 0.0 ? tol : (p == 2.0 ? 1e-8 : 1e-6); }
};

/// Principal Robin eigenpair: ||u1||_p = 1, u1 > 0 at every node.
struct EigenPair {
    double lambda1 = 0.0;
    DiscreteField u1;
    /// Max-norm of A(u1) + Robin(u1) - lambda1 psi_p(u1).
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// (||Du||_p^p + int beta |u|^p) / ||u||_p^p.
[[nodiscard]] double rayleigh_quotient(const ProblemSpec& spec, const DiscreteField& u);

/// Nodal eigen-residual A(u) + Robin(u) - lambda psi_p(u).
[[nodiscard]] std::vector<double> eigen_residual(const ProblemSpec& spec, const DiscreteField& u, double lambda);

/// Minimizes the Rayleigh quotient by preconditioned gradient descent with Armijo
/// backtracking and L^p renormalization after every step. The gradient is taken in
/// the metric of the linearized operator (A + Robin + psi_p)' at the current iterate.
///
/// Returns the best iterate with converged = false when the iteration budget runs
/// out. Throws DegenerateEigenfunction if the converged minimizer is not positive.
[[nodiscard]] EigenPair principal_eigenpair(const ProblemSpec& spec, const EigenOptions& opts = {});

struct CoercivityOptions {
    int starts = 8;
    std::uint64_t seed = 20240611;
    double tol = -1.0;
    int max_iterations = 20000;
    /// Reuse an eigenpair instead of computing one for the precondition check.
    std::optional<EigenPair> eigen;
    /// Gap proxying theta "not identically lambda1". Negative selects 1e-3*lambda1 (1e-6 if lambda1 = 0).
    double strict_gap = -1.0;
};

struct CoercivityEstimate {
    std::vector<double> theta;
    double c0 = 0.0;
    /// Minimizer with unit W^{1,p} norm.
    DiscreteField minimizer;
    double lambda1 = 0.0;
    /// False signals margin-nonpositive: theta is too close to lambda1 for this mesh.
    bool positive = false;
    bool converged = false;
    int best_start = 0;
};

/// ||Du||_p^p + int beta |u|^p - int theta |u|^p.
[[nodiscard]] double coercivity_form(const ProblemSpec& spec, std::span<const double> theta, const DiscreteField& u);
/// coercivity_form(u) / ||u||^p with the W^{1,p} norm.
[[nodiscard]] double coercivity_quotient(const ProblemSpec& spec, std::span<const double> theta,
                                         const DiscreteField& u);

/// c0 = min of the coercivity form on the W^{1,p} unit sphere, by multi-start
/// preconditioned gradient descent. Throws HypothesisViolated when theta exceeds
/// lambda1 at some node or stays within the strict gap of lambda1 everywhere.
[[nodiscard]] CoercivityEstimate coercivity_margin(const ProblemSpec& spec, std::span<const double> theta,
                                                   const CoercivityOptions& opts = {});

}  // namespace robinp
