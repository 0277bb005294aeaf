#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace robinp {

/// Points and gradient vectors. In 1D the second component is zero.
using Point = std::array<double, 2>;
using Vec2 = std::array<double, 2>;

/// Conforming simplicial mesh of an interval or an axis-aligned rectangle.
///
/// Elements are segments (1D) or triangles (2D) stored with dim+1 node indices;
/// boundary facets are endpoint nodes (1D, counting measure 1) or perimeter
/// edges (2D). A built mesh is immutable.
class Mesh {
public:
    Mesh(int dim, std::vector<Point> nodes, std::vector<std::array<std::size_t, 3>> elements,
         std::vector<std::array<std::size_t, 2>> facets);

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t num_nodes() const noexcept { return nodes_.size(); }
    [[nodiscard]] std::size_t num_elements() const noexcept { return elements_.size(); }
    [[nodiscard]] std::size_t num_facets() const noexcept { return facets_.size(); }
    /// Nodes per element: dim + 1.
    [[nodiscard]] std::size_t element_size() const noexcept { return static_cast<std::size_t>(dim_) + 1; }
    /// Nodes per boundary facet: dim.
    [[nodiscard]] std::size_t facet_size() const noexcept { return static_cast<std::size_t>(dim_); }

    [[nodiscard]] const Point& node(std::size_t i) const { return nodes_[i]; }
    [[nodiscard]] std::span<const Point> nodes() const noexcept { return nodes_; }
    /// Node indices of element k; only the first element_size() entries are used.
    [[nodiscard]] const std::array<std::size_t, 3>& element(std::size_t k) const { return elements_[k]; }
    [[nodiscard]] const std::array<std::size_t, 2>& facet(std::size_t f) const { return facets_[f]; }

    [[nodiscard]] double element_measure(std::size_t k) const { return element_measures_[k]; }
    [[nodiscard]] double facet_measure(std::size_t f) const { return facet_measures_[f]; }
    [[nodiscard]] std::span<const double> element_measures() const noexcept { return element_measures_; }

    /// Reference-gradient data: gradient of the local basis function j on element k.
    [[nodiscard]] const Vec2& basis_gradient(std::size_t k, std::size_t j) const { return basis_gradients_[k][j]; }

    [[nodiscard]] bool is_boundary_node(std::size_t i) const { return boundary_node_[i]; }

    /// Vertex-rule (lumped) mass of each node: sum over incident elements of |K|/(dim+1).
    [[nodiscard]] std::span<const double> lumped_mass() const noexcept { return lumped_mass_; }
    /// Trapezoid/point weights of the boundary rule at each node (zero for interior nodes).
    [[nodiscard]] std::span<const double> boundary_weight() const noexcept { return boundary_weight_; }

    [[nodiscard]] double domain_measure() const noexcept;
    /// Largest element diameter.
    [[nodiscard]] double diameter() const noexcept { return max_diameter_; }

private:
    int dim_;
    std::vector<Point> nodes_;
    std::vector<std::array<std::size_t, 3>> elements_;
    std::vector<std::array<std::size_t, 2>> facets_;
    std::vector<double> element_measures_;
    std::vector<double> facet_measures_;
    std::vector<std::array<Vec2, 3>> basis_gradients_;
    std::vector<bool> boundary_node_;
    std::vector<double> lumped_mass_;
    std::vector<double> boundary_weight_;
    double max_diameter_ = 0.0;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Uniform partition of [a, b] into n segments.
[[nodiscard]] MeshPtr build_interval_mesh(double a, double b, std::size_t n);

/// Structured nx-by-ny grid on [0,lx]x[0,ly], each cell split along the
/// diagonal from its lower-left to its upper-right corner. Node (i, j) has
/// index j*(nx+1) + i.
[[nodiscard]] MeshPtr build_rectangle_mesh(double lx, double ly, std::size_t nx, std::size_t ny);

[[nodiscard]] double boundary_measure(const Mesh& mesh);

/// CSV dump: a `node_id,x[,y]` block, a blank line, then `element_id,n0,n1[,n2]`.
void write_mesh_csv(std::ostream& out, const Mesh& mesh);

}  // namespace robinp
