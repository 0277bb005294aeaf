#pragma once

#include "robinp/problem.hpp"
#include "robinp/reaction.hpp"

#include <Eigen/SparseCore>

#include <vector>

namespace robinp {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// The perturbed problem -Delta_p u + |u|^{p-2}u = fhat(z,u,Du) + eps*e with Robin data.
struct AuxiliaryProblem {
    ProblemSpec problem;
    ReactionSpec reaction;
    double epsilon = 0.0;
    /// Strictly positive forcing profile.
    DiscreteField e;

    /// Validates the problem, eps >= 0, e > 0 on the same mesh.
    void validate() const;
};

/// Which zero-order terms enter the residual.
enum class ReactionForm {
    /// psi_p(u) - fhat: the auxiliary operator V.
    Shifted,
    /// -f only: the original equation.
    Original,
};

/// Exact gradient of the P1 interpolant on every element.
[[nodiscard]] ElementGradients element_gradients(const Mesh& mesh, std::span<const double> u);
[[nodiscard]] ElementGradients element_gradients(const DiscreteField& u);

/// <A(u), h> = sum_K |K| g(|Du|) (Du, Dh).
[[nodiscard]] double a_form(const ProblemSpec& spec, const DiscreteField& u, const DiscreteField& h);
/// Boundary term of the Robin operator with the vertex rule on each facet.
[[nodiscard]] double robin_form(const ProblemSpec& spec, const DiscreteField& u, const DiscreteField& h);
/// int |u|^{p-2} u h with the lumped (vertex) rule.
[[nodiscard]] double psi_p_form(const ProblemSpec& spec, const DiscreteField& u, const DiscreteField& h);

/// Lumped-quadrature L^p norm.
[[nodiscard]] double lp_norm(const Mesh& mesh, std::span<const double> u, double p);
[[nodiscard]] double lp_norm(const DiscreteField& u, double p);
/// (sum_K |K| |Du_K|^p)^{1/p}.
[[nodiscard]] double gradient_lp_norm(const DiscreteField& u, double p);
/// W^{1,p} norm [||u||_p^p + ||Du||_p^p]^{1/p}.
[[nodiscard]] double sobolev_norm(const DiscreteField& u, double p);

/// Nodal vectors of the individual operators tested against each basis function.
[[nodiscard]] std::vector<double> a_vector(const ProblemSpec& spec, std::span<const double> u);
[[nodiscard]] std::vector<double> robin_vector(const ProblemSpec& spec, std::span<const double> u);
[[nodiscard]] std::vector<double> psi_vector(const ProblemSpec& spec, std::span<const double> u);

/// Derivatives of the vectors above. The psi block is diagonal.
[[nodiscard]] SparseMatrix a_jacobian(const ProblemSpec& spec, std::span<const double> u);
[[nodiscard]] SparseMatrix robin_jacobian(const ProblemSpec& spec, std::span<const double> u);
[[nodiscard]] SparseMatrix psi_jacobian(const ProblemSpec& spec, std::span<const double> u);

/// Component i is <V(u), phi_i> with the reaction evaluated at (z_i, u_i, frozen_y[K]).
/// Pass element_gradients(u) for the true residual.
[[nodiscard]] std::vector<double> v_residual(const AuxiliaryProblem& aux, const DiscreteField& u,
                                             const ElementGradients& frozen_y,
                                             ReactionForm form = ReactionForm::Shifted);

/// Derivative of v_residual in the nodal values of u at fixed frozen_y.
/// The dependence of f on y is ignored; the pattern equals the node adjacency.
[[nodiscard]] SparseMatrix v_jacobian(const AuxiliaryProblem& aux, const DiscreteField& u,
                                      const ElementGradients& frozen_y, ReactionForm form = ReactionForm::Shifted);

/// |t|^{p-2} t, with 0 at t = 0.
[[nodiscard]] double signed_power(double t, double p) noexcept;

}  // namespace robinp
