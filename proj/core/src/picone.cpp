#include "robinp/picone.hpp"

#include "robinp/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace robinp {

namespace {

double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }

void require_positive(const DiscreteField& u, double floor) {
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!(u[i] > floor)) {
            std::ostringstream os;
            os << "picone_density: u must exceed " << floor << " at every node (node " << i << " has " << u[i] << ")";
            throw PositivityRequired(os.str(), i);
        }
    }
}

}  // namespace

const char* to_string(CollapseVerdict v) noexcept {
    return v == CollapseVerdict::Healthy ? "HEALTHY" : "COLLAPSE_SUSPECTED";
}

double picone_point(double p, double u1, const Vec2& du1, double u, const Vec2& du) noexcept {
    const double t = u1 / u;
    const double tp1 = std::pow(t, p - 1.0);
    // D(u1^p / u^{p-1}) = p t^{p-1} Du1 - (p-1) t^p Du
    const Vec2 dq{p * tp1 * du1[0] - (p - 1.0) * tp1 * t * du[0], p * tp1 * du1[1] - (p - 1.0) * tp1 * t * du[1]};
    const double s = std::sqrt(dot(du, du));
    const double g = p == 2.0 ? 1.0 : (s == 0.0 ? 0.0 : std::pow(s, p - 2.0));
    return std::pow(std::sqrt(dot(du1, du1)), p) - g * dot(du, dq);
}

std::vector<double> picone_density(const ProblemSpec& spec, const DiscreteField& u1, const DiscreteField& u,
                                   double floor) {
    const Mesh& mesh = *spec.mesh;
    if (u1.size() != mesh.num_nodes() || u.size() != mesh.num_nodes()) {
        throw InvalidArgument("picone_density: field size does not match the mesh");
    }
    require_positive(u, floor);
    const auto du1 = element_gradients(mesh, u1.values());
    const auto du = element_gradients(mesh, u.values());
    const std::size_t nk = mesh.element_size();
    std::vector<double> out(mesh.num_elements());
    for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
        const auto& el = mesh.element(k);
        double a = 0.0, b = 0.0;
        for (std::size_t j = 0; j < nk; ++j) {
            a += u1[el[j]];
            b += u[el[j]];
        }
        a /= static_cast<double>(nk);
        b /= static_cast<double>(nk);
        out[k] = picone_point(spec.p, a, du1[k], b, du[k]);
    }
    return out;
}

double picone_integral(const ProblemSpec& spec, const DiscreteField& u1, const DiscreteField& u, double floor) {
    const auto density = picone_density(spec, u1, u, floor);
    double total = 0.0;
    for (std::size_t k = 0; k < density.size(); ++k) total += spec.mesh->element_measure(k) * density[k];
    return total;
}

double xi_star(const EigenPair& eigen, std::span<const double> eta_M, double p) {
    const Mesh& mesh = eigen.u1.mesh();
    if (eta_M.size() != mesh.num_nodes()) throw InvalidArgument("xi_star: eta_M size does not match the mesh");
    const auto m = mesh.lumped_mass();
    double total = 0.0;
    for (std::size_t i = 0; i < eta_M.size(); ++i) {
        total += m[i] * (eta_M[i] - eigen.lambda1) * std::pow(eigen.u1[i], p);
    }
    return total;
}

PiconeReport collapse_measure(const ProblemSpec& spec, const EigenPair& eigen, const DiscreteField& u,
                              std::span<const double> eta_M, const CollapseOptions& opts) {
    PiconeReport report;
    report.xi_star = xi_star(eigen, eta_M, spec.p);
    report.quadrature_points = spec.mesh->num_elements();
    try {
        const auto density = picone_density(spec, eigen.u1, u);
        double total = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < density.size(); ++k) {
            total += spec.mesh->element_measure(k) * density[k];
            lo = std::min(lo, density[k]);
        }
        report.integral = total;
        report.min_pointwise = lo;
    } catch (const PositivityRequired&) {
        report.integral = std::numeric_limits<double>::quiet_NaN();
        report.min_pointwise = std::numeric_limits<double>::quiet_NaN();
    }
    const double floor = opts.floor_factor * eigen.u1.max_abs();
    report.collapse_flag = u.max_abs() < floor ? CollapseVerdict::CollapseSuspected : CollapseVerdict::Healthy;
    return report;
}

PiconeReport collapse_test(const ProblemSpec& spec, const EigenPair& eigen, const DiscreteField& u,
                           std::span<const double> eta_M, const CollapseOptions& opts) {
    PiconeReport report = collapse_measure(spec, eigen, u, eta_M, opts);
    if (!(report.xi_star > 0.0)) {
        std::ostringstream os;
        os << "collapse_test: xi* = " << report.xi_star << " <= 0, the small-x lower bound eta_M does not exceed lambda1";
        throw HypothesisViolated(os.str());
    }
    return report;
}

}  // namespace robinp
