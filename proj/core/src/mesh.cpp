#include "robinp/mesh.hpp"

#include "robinp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

namespace robinp {

namespace {

double distance(const Point& a, const Point& b) {
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

}  // namespace

Mesh::Mesh(int dim, std::vector<Point> nodes, std::vector<std::array<std::size_t, 3>> elements,
           std::vector<std::array<std::size_t, 2>> facets)
    : dim_(dim), nodes_(std::move(nodes)), elements_(std::move(elements)), facets_(std::move(facets)) {
    if (dim_ != 1 && dim_ != 2) {
        throw InvalidArgument("Mesh: dimension must be 1 or 2");
    }
    if (elements_.empty()) {
        throw InvalidArgument("Mesh: no elements");
    }
    const std::size_t n_nodes = nodes_.size();
    const std::size_t nk = element_size();
    const std::size_t nf = facet_size();

    element_measures_.resize(elements_.size());
    basis_gradients_.resize(elements_.size());
    lumped_mass_.assign(n_nodes, 0.0);

    for (std::size_t k = 0; k < elements_.size(); ++k) {
        const auto& el = elements_[k];
        for (std::size_t j = 0; j < nk; ++j) {
            if (el[j] >= n_nodes) {
                throw InvalidArgument("Mesh: element " + std::to_string(k) + " references node out of range");
            }
        }
        auto& grads = basis_gradients_[k];
        double measure = 0.0;
        if (dim_ == 1) {
            const double h = nodes_[el[1]][0] - nodes_[el[0]][0];
            measure = h;
            grads[0] = {-1.0 / h, 0.0};
            grads[1] = {1.0 / h, 0.0};
            grads[2] = {0.0, 0.0};
            max_diameter_ = std::max(max_diameter_, std::abs(h));
        } else {
            const Point& a = nodes_[el[0]];
            const Point& b = nodes_[el[1]];
            const Point& c = nodes_[el[2]];
            const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            measure = 0.5 * det;
            // grad(lambda_j) = rot90(opposite edge) / det
            grads[0] = {(b[1] - c[1]) / det, (c[0] - b[0]) / det};
            grads[1] = {(c[1] - a[1]) / det, (a[0] - c[0]) / det};
            grads[2] = {(a[1] - b[1]) / det, (b[0] - a[0]) / det};
            max_diameter_ = std::max({max_diameter_, distance(a, b), distance(b, c), distance(c, a)});
        }
        if (!(measure > 0.0)) {
            throw InvalidArgument("Mesh: element " + std::to_string(k) + " has nonpositive measure");
        }
        element_measures_[k] = measure;
        for (std::size_t j = 0; j < nk; ++j) {
            lumped_mass_[el[j]] += measure / static_cast<double>(nk);
        }
    }

    boundary_node_.assign(n_nodes, false);
    boundary_weight_.assign(n_nodes, 0.0);
    facet_measures_.resize(facets_.size());
    for (std::size_t f = 0; f < facets_.size(); ++f) {
        const auto& fa = facets_[f];
        for (std::size_t j = 0; j < nf; ++j) {
            if (fa[j] >= n_nodes) {
                throw InvalidArgument("Mesh: facet " + std::to_string(f) + " references node out of range");
            }
        }
        const double measure = dim_ == 1 ? 1.0 : distance(nodes_[fa[0]], nodes_[fa[1]]);
        if (!(measure > 0.0)) {
            throw InvalidArgument("Mesh: facet " + std::to_string(f) + " has zero measure");
        }
        facet_measures_[f] = measure;
        for (std::size_t j = 0; j < nf; ++j) {
            boundary_node_[fa[j]] = true;
            boundary_weight_[fa[j]] += measure / static_cast<double>(nf);
        }
    }
}

double Mesh::domain_measure() const noexcept {
    return std::accumulate(element_measures_.begin(), element_measures_.end(), 0.0);
}

MeshPtr build_interval_mesh(double a, double b, std::size_t n) {
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw InvalidArgument("build_interval_mesh: endpoints must be finite");
    }
    if (!(a < b)) {
        throw InvalidArgument("build_interval_mesh: require a < b");
    }
    if (n == 0) {
        throw InvalidArgument("build_interval_mesh: need at least one cell");
    }
    std::vector<Point> nodes(n + 1);
    const double h = (b - a) / static_cast<double>(n);
    for (std::size_t i = 0; i <= n; ++i) {
        nodes[i] = {i == n ? b : a + h * static_cast<double>(i), 0.0};
    }
    std::vector<std::array<std::size_t, 3>> elements(n);
    for (std::size_t k = 0; k < n; ++k) {
        elements[k] = {k, k + 1, 0};
    }
    std::vector<std::array<std::size_t, 2>> facets{{0, 0}, {n, 0}};
    return std::make_shared<const Mesh>(1, std::move(nodes), std::move(elements), std::move(facets));
}

MeshPtr build_rectangle_mesh(double lx, double ly, std::size_t nx, std::size_t ny) {
    if (!std::isfinite(lx) || !std::isfinite(ly) || !(lx > 0.0) || !(ly > 0.0)) {
        throw InvalidArgument("build_rectangle_mesh: side lengths must be positive");
    }
    if (nx == 0 || ny == 0) {
        throw InvalidArgument("build_rectangle_mesh: need at least one cell per direction");
    }
    const auto id = [nx](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };
    std::vector<Point> nodes((nx + 1) * (ny + 1));
    for (std::size_t j = 0; j <= ny; ++j) {
        const double y = j == ny ? ly : ly * static_cast<double>(j) / static_cast<double>(ny);
        for (std::size_t i = 0; i <= nx; ++i) {
            const double x = i == nx ? lx : lx * static_cast<double>(i) / static_cast<double>(nx);
            nodes[id(i, j)] = {x, y};
        }
    }
    std::vector<std::array<std::size_t, 3>> elements;
    elements.reserve(2 * nx * ny);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t n00 = id(i, j);
            const std::size_t n10 = id(i + 1, j);
            const std::size_t n11 = id(i + 1, j + 1);
            const std::size_t n01 = id(i, j + 1);
            elements.push_back({n00, n10, n11});
            elements.push_back({n00, n11, n01});
        }
    }
    // Perimeter edges, counterclockwise starting at the origin.
    std::vector<std::array<std::size_t, 2>> facets;
    facets.reserve(2 * (nx + ny));
    for (std::size_t i = 0; i < nx; ++i) facets.push_back({id(i, 0), id(i + 1, 0)});
    for (std::size_t j = 0; j < ny; ++j) facets.push_back({id(nx, j), id(nx, j + 1)});
    for (std::size_t i = nx; i > 0; --i) facets.push_back({id(i, ny), id(i - 1, ny)});
    for (std::size_t j = ny; j > 0; --j) facets.push_back({id(0, j), id(0, j - 1)});
    return std::make_shared<const Mesh>(2, std::move(nodes), std::move(elements), std::move(facets));
}

double boundary_measure(const Mesh& mesh) {
    double total = 0.0;
    for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
        total += mesh.facet_measure(f);
    }
    return total;
}

void write_mesh_csv(std::ostream& out, const Mesh& mesh) {
    const auto old_precision = out.precision(17);
    out << (mesh.dim() == 1 ? "node_id,x\n" : "node_id,x,y\n");
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        out << i << ',' << mesh.node(i)[0];
        if (mesh.dim() == 2) out << ',' << mesh.node(i)[1];
        out << '\n';
    }
    out << '\n' << (mesh.dim() == 1 ? "element_id,n0,n1\n" : "element_id,n0,n1,n2\n");
    for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
        out << k;
        for (std::size_t j = 0; j < mesh.element_size(); ++j) out << ',' << mesh.element(k)[j];
        out << '\n';
    }
    out.precision(old_precision);
}

}  // namespace robinp
