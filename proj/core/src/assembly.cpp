#include "robinp/assembly.hpp"

#include "robinp/errors.hpp"

#include <cmath>
#include <string>

namespace robinp {

namespace {

double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }

/// Flux F(xi) = g(|xi|^2) xi with g = (|xi|^2 + delta^2)^{(p-2)/2}.
struct Flux {
    double p;
    double delta;

    [[nodiscard]] double g(double s2) const {
        if (delta > 0.0) return std::pow(s2 + delta * delta, 0.5 * (p - 2.0));
        if (p == 2.0) return 1.0;
        if (s2 == 0.0) return 0.0;  // 0^{p-2} * 0 = 0 for p > 2
        return std::pow(s2, 0.5 * (p - 2.0));
    }

    /// Coefficient c in dF/dxi = g I + c xi xi^T.
    [[nodiscard]] double c(double s2) const {
        if (p == 2.0) return 0.0;
        if (delta > 0.0) return (p - 2.0) * std::pow(s2 + delta * delta, 0.5 * (p - 4.0));
        if (s2 == 0.0) return 0.0;
        return (p - 2.0) * std::pow(s2, 0.5 * (p - 4.0));
    }
};

Flux flux_of(const ProblemSpec& spec) { return Flux{spec.p, spec.effective_delta()}; }

void check_field(const Mesh& mesh, std::span<const double> u, const char* where) {
    if (u.size() != mesh.num_nodes()) {
        throw InvalidArgument(std::string(where) + ": field has " + std::to_string(u.size()) + " values, mesh has " +
                              std::to_string(mesh.num_nodes()) + " nodes");
    }
}

void check_same_mesh(const ProblemSpec& spec, const DiscreteField& u, const char* where) {
    if (u.mesh_ptr() != spec.mesh) {
        check_field(*spec.mesh, u.values(), where);
    }
}

double psi_derivative(double t, double p) {
    if (p == 2.0) return 1.0;
    const double a = std::abs(t);
    if (p < 2.0) return (p - 1.0) * std::pow(std::max(a, 1e-12), p - 2.0);
    return (p - 1.0) * std::pow(a, p - 2.0);
}

/// Adds the element-local node pairs with value zero so the pattern is fixed.
void reserve_pattern(const Mesh& mesh, std::vector<Eigen::Triplet<double>>& triplets) {
    const std::size_t nk = mesh.element_size();
    triplets.reserve(triplets.size() + mesh.num_elements() * nk * nk);
    for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
        const auto& el = mesh.element(k);
        for (std::size_t a = 0; a < nk; ++a) {
            for (std::size_t b = 0; b < nk; ++b) {
                triplets.emplace_back(static_cast<int>(el[a]), static_cast<int>(el[b]), 0.0);
            }
        }
    }
}

void add_a_jacobian(const ProblemSpec& spec, std::span<const double> u, std::vector<Eigen::Triplet<double>>& triplets) {
    const Mesh& mesh = *spec.mesh;
    const Flux flux = flux_of(spec);
    const std::size_t nk = mesh.element_size();
    const auto grads = element_gradients(mesh, u);
    for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
        const auto& el = mesh.element(k);
        const Vec2& xi = grads[k];
        const double s2 = dot(xi, xi);
        const double g = flux.g(s2);
        const double c = flux.c(s2);
        const double w = mesh.element_measure(k);
        for (std::size_t a = 0; a < nk; ++a) {
            const Vec2& ga = mesh.basis_gradient(k, a);
            for (std::size_t b = 0; b < nk; ++b) {
                const Vec2& gb = mesh.basis_gradient(k, b);
                const double v = w * (g * dot(ga, gb) + c * dot(xi, ga) * dot(xi, gb));
                triplets.emplace_back(static_cast<int>(el[a]), static_cast<int>(el[b]), v);
            }
        }
    }
}

void add_robin_jacobian(const ProblemSpec& spec, std::span<const double> u,
                        std::vector<Eigen::Triplet<double>>& triplets) {
    const auto bw = spec.mesh->boundary_weight();
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (bw[i] == 0.0) continue;
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), bw[i] * spec.beta[i] * psi_derivative(u[i], spec.p));
    }
}

SparseMatrix from_triplets(std::size_t n, const std::vector<Eigen::Triplet<double>>& triplets) {
    SparseMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

}  // namespace

double signed_power(double t, double p) noexcept {
    if (t == 0.0) return 0.0;
    if (p == 2.0) return t;
    return std::copysign(std::pow(std::abs(t), p - 1.0), t);
}

void AuxiliaryProblem::validate() const {
    problem.validate();
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("AuxiliaryProblem: epsilon must be >= 0");
    if (!reaction.eval) throw InvalidArgument("AuxiliaryProblem: reaction has no evaluation function");
    check_field(*problem.mesh, e.values(), "AuxiliaryProblem");
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (!(e[i] > 0.0)) throw InvalidArgument("AuxiliaryProblem: e must be strictly positive (node " + std::to_string(i) + ")");
    }
}

ElementGradients element_gradients(const Mesh& mesh, std::span<const double> u) {
    check_field(mesh, u, "element_gradients");
    const std::size_t nk = mesh.element_size();
    ElementGradients grads(mesh.num_elements());
    for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
        const auto& el = mesh.element(k);
        Vec2 g{0.0, 0.0};
        for (std::size_t j = 0; j < nk; ++j) {
            const Vec2& b = mesh.basis_gradient(k, j);
            g[0] += u[el[j]] * b[0];
            g[1] += u[el[j]] * b[1];
        }
        grads[k] = g;
    }
    return grads;
}

ElementGradients element_gradients(const DiscreteField& u) { return element_gradients(u.mesh(), u.values()); }

double a_form(const ProblemSpec& spec, const DiscreteField& u, const DiscreteField& h) {
    check_same_mesh(spec, u, "a_form");
    check_same_mesh(spec, h, "a_form");
    const Mesh& mesh = *spec.mesh;
    const Flux flux = flux_of(spec);
    const auto du = element_gradients(mesh, u.values());
    const auto dh = element_gradients(mesh, h.values());
    double total = 0.0;
    for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
        total += mesh.element_measure(k) * flux.g(dot(du[k], du[k])) * dot(du[k], dh[k]);
    }
    return total;
}

double robin_form(const ProblemSpec& spec, const DiscreteField& u, const DiscreteField& h) {
    check_same_mesh(spec, u, "robin_form");
    check_same_mesh(spec, h, "robin_form");
    const Mesh& mesh = *spec.mesh;
    double total = 0.0;
    for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
        const auto& fa = mesh.facet(f);
        const double w = mesh.facet_measure(f) / static_cast<double>(mesh.facet_size());
        for (std::size_t j = 0; j < mesh.facet_size(); ++j) {
            const std::size_t i = fa[j];
            total += w * spec.beta[i] * signed_power(u[i], spec.p) * h[i];
        }
    }
    return total;
}

double psi_p_form(const ProblemSpec& spec, const DiscreteField& u, const DiscreteField& h) {
    check_same_mesh(spec, u, "psi_p_form");
    check_same_mesh(spec, h, "psi_p_form");
    const auto m = spec.mesh->lumped_mass();
    double total = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) total += m[i] * signed_power(u[i], spec.p) * h[i];
    return total;
}

double lp_norm(const Mesh& mesh, std::span<const double> u, double p) {
    check_field(mesh, u, "lp_norm");
    if (!(p >= 1.0)) throw InvalidArgument("lp_norm: p must be >= 1");
    const auto m = mesh.lumped_mass();
    double total = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) total += m[i] * std::pow(std::abs(u[i]), p);
    return std::pow(total, 1.0 / p);
}

double lp_norm(const DiscreteField& u, double p) { return lp_norm(u.mesh(), u.values(), p); }

double gradient_lp_norm(const DiscreteField& u, double p) {
    const Mesh& mesh = u.mesh();
    const auto du = element_gradients(u);
    double total = 0.0;
    for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
        total += mesh.element_measure(k) * std::pow(std::sqrt(dot(du[k], du[k])), p);
    }
    return std::pow(total, 1.0 / p);
}

double sobolev_norm(const DiscreteField& u, double p) {
    return std::pow(std::pow(lp_norm(u, p), p) + std::pow(gradient_lp_norm(u, p), p), 1.0 / p);
}

std::vector<double> a_vector(const ProblemSpec& spec, std::span<const double> u) {
    const Mesh& mesh = *spec.mesh;
    const Flux flux = flux_of(spec);
    const auto du = element_gradients(mesh, u);
    std::vector<double> out(mesh.num_nodes(), 0.0);
    for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
        const auto& el = mesh.element(k);
        const double coeff = mesh.element_measure(k) * flux.g(dot(du[k], du[k]));
        for (std::size_t j = 0; j < mesh.element_size(); ++j) {
            out[el[j]] += coeff * dot(du[k], mesh.basis_gradient(k, j));
        }
    }
    return out;
}

std::vector<double> robin_vector(const ProblemSpec& spec, std::span<const double> u) {
    check_field(*spec.mesh, u, "robin_vector");
    const auto bw = spec.mesh->boundary_weight();
    std::vector<double> out(u.size(), 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (bw[i] != 0.0) out[i] = bw[i] * spec.beta[i] * signed_power(u[i], spec.p);
    }
    return out;
}

std::vector<double> psi_vector(const ProblemSpec& spec, std::span<const double> u) {
    check_field(*spec.mesh, u, "psi_vector");
    const auto m = spec.mesh->lumped_mass();
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = m[i] * signed_power(u[i], spec.p);
    return out;
}

SparseMatrix a_jacobian(const ProblemSpec& spec, std::span<const double> u) {
    std::vector<Eigen::Triplet<double>> triplets;
    add_a_jacobian(spec, u, triplets);
    return from_triplets(u.size(), triplets);
}

SparseMatrix robin_jacobian(const ProblemSpec& spec, std::span<const double> u) {
    check_field(*spec.mesh, u, "robin_jacobian");
    std::vector<Eigen::Triplet<double>> triplets;
    add_robin_jacobian(spec, u, triplets);
    return from_triplets(u.size(), triplets);
}

SparseMatrix psi_jacobian(const ProblemSpec& spec, std::span<const double> u) {
    check_field(*spec.mesh, u, "psi_jacobian");
    const auto m = spec.mesh->lumped_mass();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), m[i] * psi_derivative(u[i], spec.p));
    }
    return from_triplets(u.size(), triplets);
}

std::vector<double> v_residual(const AuxiliaryProblem& aux, const DiscreteField& u, const ElementGradients& frozen_y,
                               ReactionForm form) {
    const ProblemSpec& spec = aux.problem;
    const Mesh& mesh = *spec.mesh;
    check_same_mesh(spec, u, "v_residual");
    if (frozen_y.size() != mesh.num_elements()) {
        throw InvalidArgument("v_residual: frozen gradient has " + std::to_string(frozen_y.size()) +
                              " entries for " + std::to_string(mesh.num_elements()) + " elements");
    }
    const double p = spec.p;
    const Flux flux = flux_of(spec);
    const auto du = element_gradients(mesh, u.values());
    const std::size_t nk = mesh.element_size();
    const bool shifted = form == ReactionForm::Shifted;

    std::vector<double> r(mesh.num_nodes(), 0.0);
    for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
        const auto& el = mesh.element(k);
        const double measure = mesh.element_measure(k);
        const double coeff = measure * flux.g(dot(du[k], du[k]));
        const double w = measure / static_cast<double>(nk);
        for (std::size_t j = 0; j < nk; ++j) {
            const std::size_t i = el[j];
            const double ui = u[i];
            // psi_p(u) and the shift (u^+)^{p-1} cancel exactly for u >= 0.
            const double zero_order = shifted ? signed_power(ui, p) - std::pow(std::max(ui, 0.0), p - 1.0) : 0.0;
            const double f = evaluate(aux.reaction, mesh.node(i), ui, frozen_y[k]);
            r[i] += coeff * dot(du[k], mesh.basis_gradient(k, j));
            r[i] += w * (zero_order - f - aux.epsilon * aux.e[i]);
        }
    }
    const auto bw = mesh.boundary_weight();
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (bw[i] != 0.0) r[i] += bw[i] * spec.beta[i] * signed_power(u[i], p);
    }
    return r;
}

SparseMatrix v_jacobian(const AuxiliaryProblem& aux, const DiscreteField& u, const ElementGradients& frozen_y,
                        ReactionForm form) {
    const ProblemSpec& spec = aux.problem;
    const Mesh& mesh = *spec.mesh;
    check_same_mesh(spec, u, "v_jacobian");
    if (frozen_y.size() != mesh.num_elements()) {
        throw InvalidArgument("v_jacobian: frozen gradient size does not match the element count");
    }
    const double p = spec.p;
    const std::size_t nk = mesh.element_size();
    const bool shifted = form == ReactionForm::Shifted;

    std::vector<Eigen::Triplet<double>> triplets;
    reserve_pattern(mesh, triplets);
    add_a_jacobian(spec, u.values(), triplets);
    add_robin_jacobian(spec, u.values(), triplets);
    for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
        const auto& el = mesh.element(k);
        const double w = mesh.element_measure(k) / static_cast<double>(nk);
        for (std::size_t j = 0; j < nk; ++j) {
            const std::size_t i = el[j];
            const double ui = u[i];
            double zero_order = 0.0;
            if (shifted && ui <= 0.0) zero_order = psi_derivative(ui, p);
            const double fx = evaluate_dx(aux.reaction, mesh.node(i), ui, frozen_y[k]);
            triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), w * (zero_order - fx));
        }
    }
    return from_triplets(mesh.num_nodes(), triplets);
}

}  // namespace robinp
