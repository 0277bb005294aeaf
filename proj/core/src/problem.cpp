#include "robinp/problem.hpp"

#include "robinp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace robinp {

DiscreteField::DiscreteField(MeshPtr mesh) : mesh_(std::move(mesh)) {
    if (!mesh_) throw InvalidArgument("DiscreteField: null mesh");
    values_.assign(mesh_->num_nodes(), 0.0);
}

DiscreteField::DiscreteField(MeshPtr mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
    if (!mesh_) throw InvalidArgument("DiscreteField: null mesh");
    if (values_.size() != mesh_->num_nodes()) {
        throw InvalidArgument("DiscreteField: " + std::to_string(values_.size()) + " values for " +
                              std::to_string(mesh_->num_nodes()) + " nodes");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw InvalidArgument("DiscreteField: non-finite nodal value");
    }
}

DiscreteField DiscreteField::constant(MeshPtr mesh, double value) {
    const std::size_t n = mesh->num_nodes();
    return DiscreteField(std::move(mesh), std::vector<double>(n, value));
}

double DiscreteField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double DiscreteField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double DiscreteField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

void ProblemSpec::validate() const {
    if (!mesh) throw InvalidArgument("ProblemSpec: null mesh");
    if (!(p > 1.0) || !std::isfinite(p)) throw InvalidArgument("ProblemSpec: p must exceed 1");
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidArgument("ProblemSpec: delta must be >= 0");
    if (beta.size() != mesh->num_nodes()) {
        throw InvalidArgument("ProblemSpec: beta has " + std::to_string(beta.size()) + " values for " +
                              std::to_string(mesh->num_nodes()) + " nodes");
    }
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < beta.size(); ++i) {
        if (mesh->is_boundary_node(i) && !(beta[i] >= 0.0 && std::isfinite(beta[i]))) bad.push_back(i);
    }
    if (!bad.empty()) {
        const std::string what =
            "ProblemSpec: beta must be finite and nonnegative on the boundary (first bad node " +
            std::to_string(bad.front()) + ")";
        throw HypothesisViolated(what, std::move(bad));
    }
}

double ProblemSpec::effective_delta() const noexcept {
    if (delta > 0.0) return delta;
    return p < 2.0 ? kDefaultFluxRegularization : 0.0;
}

bool ProblemSpec::neumann() const {
    for (std::size_t i = 0; i < beta.size(); ++i) {
        if (mesh->is_boundary_node(i) && beta[i] != 0.0) return false;
    }
    return true;
}

ProblemSpec make_problem(MeshPtr mesh, double p, double beta, double delta) {
    ProblemSpec spec;
    spec.p = p;
    spec.beta.assign(mesh->num_nodes(), 0.0);
    for (std::size_t i = 0; i < spec.beta.size(); ++i) {
        if (mesh->is_boundary_node(i)) spec.beta[i] = beta;
    }
    spec.mesh = std::move(mesh);
    spec.delta = delta;
    spec.validate();
    return spec;
}

}  // namespace robinp
