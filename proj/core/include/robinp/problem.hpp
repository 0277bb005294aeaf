#pragma once

#include "robinp/mesh.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace robinp {

/// Continuous piecewise-linear field: one value per mesh node.
class DiscreteField {
public:
    DiscreteField() = default;
    /// Zero field on the mesh.
    explicit DiscreteField(MeshPtr mesh);
    DiscreteField(MeshPtr mesh, std::vector<double> values);

    /// Nodal interpolant of a function of the node coordinates.
    template <class F>
    static DiscreteField interpolate(MeshPtr mesh, F&& fn) {
        std::vector<double> v(mesh->num_nodes());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(mesh->node(i));
        return DiscreteField(std::move(mesh), std::move(v));
    }
    static DiscreteField constant(MeshPtr mesh, double value);

    [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
    [[nodiscard]] const MeshPtr& mesh_ptr() const noexcept { return mesh_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<double> values() noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] double& operator[](std::size_t i) { return values_[i]; }

    [[nodiscard]] double min() const;
    [[nodiscard]] double max() const;
    [[nodiscard]] double max_abs() const;

private:
    MeshPtr mesh_;
    std::vector<double> values_;
};

/// Fixed-point y = Du: one gradient per element.
using ElementGradients = std::vector<Vec2>;

/// Default flux regularization used for p < 2 when none is given.
inline constexpr double kDefaultFluxRegularization = 1e-8;

/// Left-hand side of the Robin problem: exponent, mesh, nodal beta, flux regularization.
struct ProblemSpec {
    double p = 2.0;
    MeshPtr mesh;
    /// Nodal values of beta. Only boundary nodes are read.
    std::vector<double> beta;
    /// Flux regularization delta >= 0. See effective_delta().
    double delta = 0.0;

    /// Throws InvalidArgument / HypothesisViolated if p <= 1, beta < 0 on the boundary, delta < 0, or sizes mismatch.
    void validate() const;

    /// delta if positive; the default regularization when p < 2; otherwise 0 (raw |Du|^{p-2}).
    [[nodiscard]] double effective_delta() const noexcept;
    [[nodiscard]] bool neumann() const;
};

/// Convenience: spec with a constant beta on every boundary node.
[[nodiscard]] ProblemSpec make_problem(MeshPtr mesh, double p, double beta, double delta = 0.0);

}  // namespace robinp
