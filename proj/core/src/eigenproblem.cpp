#include "robinp/eigenproblem.hpp"

#include "linear_solve.hpp"
#include "robinp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

namespace robinp {

namespace {

using Vector = std::vector<double>;

/// Homogeneous quotient Q(u) = <N(u), u> / <D(u), u> where N, D are the
/// (scaled) gradients of the p-homogeneous numerator and denominator.
struct Quotient {
    std::function<Vector(std::span<const double>)> numerator;
    std::function<Vector(std::span<const double>)> denominator;
    std::function<SparseMatrix(std::span<const double>)> metric;
    std::function<void(Vector&)> normalize;
    double p = 2.0;
};

struct Minimum {
    Vector u;
    double value = 0.0;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct Evaluation {
    double value;
    Vector residual;
};

Evaluation evaluate_quotient(const Quotient& q, std::span<const double> u) {
    const Vector n = q.numerator(u);
    const Vector d = q.denominator(u);
    const double value = detail::dot(n, u) / detail::dot(d, u);
    Vector r(u.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = n[i] - value * d[i];
    return {value, std::move(r)};
}

double quotient_value(const Quotient& q, std::span<const double> u) {
    return detail::dot(q.numerator(u), u) / detail::dot(q.denominator(u), u);
}

Minimum minimize_quotient(const Quotient& q, Vector u, double tol, int max_iterations, double slope_c, double factor,
                          int max_halvings) {
    q.normalize(u);
    Minimum out;
    Evaluation ev = evaluate_quotient(q, u);
    int it = 0;
    for (; it < max_iterations; ++it) {
        if (detail::max_abs(ev.residual) <= tol) {
            out.converged = true;
            break;
        }
        Vector d;
        try {
            d = detail::sparse_solve(q.metric(u), ev.residual);
        } catch (const LinearSolveFailed&) {
            d = ev.residual;
        }
        for (double& x : d) x = -x;
        const double denom = detail::dot(q.denominator(u), u);
        double slope = q.p * detail::dot(ev.residual, d) / denom;
        if (!(slope < 0.0)) {
            d = ev.residual;
            for (double& x : d) x = -x;
            slope = q.p * detail::dot(ev.residual, d) / denom;
        }
        // Round-off slack: near the minimum Q changes below machine precision.
        const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(ev.value);
        double t = 1.0;
        bool accepted = false;
        Vector trial(u.size());
        for (int h = 0; h <= max_halvings; ++h, t *= factor) {
            for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + t * d[i];
            q.normalize(trial);
            const double value = quotient_value(q, trial);
            if (std::isfinite(value) && value <= ev.value + slope_c * t * slope + slack) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        u.swap(trial);
        ev = evaluate_quotient(q, u);
    }
    out.u = std::move(u);
    out.value = ev.value;
    out.residual_norm = detail::max_abs(ev.residual);
    out.iterations = it;
    return out;
}

void scale_to(Vector& u, double norm) {
    if (!(norm > 0.0) || !std::isfinite(norm)) throw InvalidArgument("cannot normalize a zero field");
    for (double& x : u) x /= norm;
}

Vector add(const Vector& a, const Vector& b) {
    Vector c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
    return c;
}

}  // namespace

double rayleigh_quotient(const ProblemSpec& spec, const DiscreteField& u) {
    const double denom = std::pow(lp_norm(u, spec.p), spec.p);
    if (!(denom > 0.0)) throw InvalidArgument("rayleigh_quotient: zero field");
    return (a_form(spec, u, u) + robin_form(spec, u, u)) / denom;
}

std::vector<double> eigen_residual(const ProblemSpec& spec, const DiscreteField& u, double lambda) {
    Vector r = add(a_vector(spec, u.values()), robin_vector(spec, u.values()));
    const Vector psi = psi_vector(spec, u.values());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= lambda * psi[i];
    return r;
}

EigenPair principal_eigenpair(const ProblemSpec& spec, const EigenOptions& opts) {
    spec.validate();
    const Mesh& mesh = *spec.mesh;
    const double p = spec.p;

    Quotient q;
    q.p = p;
    q.numerator = [&](std::span<const double> u) { return add(a_vector(spec, u), robin_vector(spec, u)); };
    q.denominator = [&](std::span<const double> u) { return psi_vector(spec, u); };
    q.metric = [&](std::span<const double> u) {
        SparseMatrix m = a_jacobian(spec, u);
        m += robin_jacobian(spec, u);
        m += psi_jacobian(spec, u);
        return m;
    };
    q.normalize = [&](Vector& u) { scale_to(u, lp_norm(mesh, u, p)); };

    Vector start(mesh.num_nodes(), 1.0);
    if (opts.initial) {
        if (opts.initial->size() != mesh.num_nodes()) throw InvalidArgument("principal_eigenpair: initial guess size mismatch");
        start.assign(opts.initial->values().begin(), opts.initial->values().end());
    }

    Minimum m = minimize_quotient(q, std::move(start), opts.resolved_tol(p), opts.max_iterations, opts.armijo_slope,
                                  opts.armijo_factor, opts.max_halvings);

    double sum = 0.0;
    for (double x : m.u) sum += x;
    if (sum < 0.0) {
        for (double& x : m.u) x = -x;
    }

    EigenPair pair;
    pair.lambda1 = m.value;
    pair.residual_norm = m.residual_norm;
    pair.iterations = m.iterations;
    pair.converged = m.converged;
    pair.u1 = DiscreteField(spec.mesh, std::move(m.u));

    if (pair.converged) {
        for (std::size_t i = 0; i < pair.u1.size(); ++i) {
            if (!(pair.u1[i] > 0.0)) {
                std::ostringstream os;
                os << "principal_eigenpair: minimizer is not positive at node " << i << " (value " << pair.u1[i] << ")";
                throw DegenerateEigenfunction(os.str());
            }
        }
    }
    return pair;
}

double coercivity_form(const ProblemSpec& spec, std::span<const double> theta, const DiscreteField& u) {
    if (theta.size() != u.size()) throw InvalidArgument("coercivity_form: theta size mismatch");
    const auto m = spec.mesh->lumped_mass();
    double theta_term = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) theta_term += m[i] * theta[i] * std::pow(std::abs(u[i]), spec.p);
    return a_form(spec, u, u) + robin_form(spec, u, u) - theta_term;
}

double coercivity_quotient(const ProblemSpec& spec, std::span<const double> theta, const DiscreteField& u) {
    const double norm = sobolev_norm(u, spec.p);
    if (!(norm > 0.0)) throw InvalidArgument("coercivity_quotient: zero field");
    return coercivity_form(spec, theta, u) / std::pow(norm, spec.p);
}

CoercivityEstimate coercivity_margin(const ProblemSpec& spec, std::span<const double> theta,
                                     const CoercivityOptions& opts) {
    spec.validate();
    const Mesh& mesh = *spec.mesh;
    const double p = spec.p;
    if (theta.size() != mesh.num_nodes()) throw InvalidArgument("coercivity_margin: theta size mismatch");
    if (opts.starts < 1) throw InvalidArgument("coercivity_margin: need at least one start");

    const EigenPair eigen = opts.eigen ? *opts.eigen : principal_eigenpair(spec);
    const double lambda1 = eigen.lambda1;
    const double gap = opts.strict_gap >= 0.0 ? opts.strict_gap : (lambda1 > 0.0 ? 1e-3 * lambda1 : 1e-6);
    const double slack = 1e-12 * (1.0 + std::abs(lambda1));

    std::vector<std::size_t> above;
    bool strict_somewhere = false;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (!(theta[i] <= lambda1 + slack)) above.push_back(i);
        if (theta[i] <= lambda1 - gap) strict_somewhere = true;
    }
    if (!above.empty()) {
        std::ostringstream os;
        os << "coercivity_margin: theta exceeds lambda1=" << lambda1 << " at " << above.size() << " node(s), first "
           << above.front();
        throw HypothesisViolated(os.str(), std::move(above));
    }
    if (!strict_somewhere) {
        std::vector<std::size_t> all(theta.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        throw HypothesisViolated("coercivity_margin: theta is within the strict gap of lambda1 at every node",
                                 std::move(all));
    }

    const auto mass = mesh.lumped_mass();
    const std::vector<double> th(theta.begin(), theta.end());
    Quotient q;
    q.p = p;
    q.numerator = [&](std::span<const double> u) {
        Vector n = add(a_vector(spec, u), robin_vector(spec, u));
        for (std::size_t i = 0; i < n.size(); ++i) n[i] -= mass[i] * th[i] * signed_power(u[i], p);
        return n;
    };
    q.denominator = [&](std::span<const double> u) { return add(a_vector(spec, u), psi_vector(spec, u)); };
    q.metric = [&](std::span<const double> u) {
        SparseMatrix m = a_jacobian(spec, u);
        m += robin_jacobian(spec, u);
        m += psi_jacobian(spec, u);
        return m;
    };
    q.normalize = [&](Vector& u) {
        scale_to(u, sobolev_norm(DiscreteField(spec.mesh, u), p));
    };

    const double tol = opts.tol > 0.0 ? opts.tol : (p == 2.0 ? 1e-8 : 1e-6);
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    CoercivityEstimate best;
    best.theta = th;
    best.lambda1 = lambda1;
    best.c0 = std::numeric_limits<double>::infinity();
    for (int s = 0; s < opts.starts; ++s) {
        Vector start(mesh.num_nodes(), 1.0);
        if (s > 0) {
            for (double& x : start) x = unit(rng);
        }
        Minimum m = minimize_quotient(q, std::move(start), tol, opts.max_iterations, 1e-4, 0.5, 40);
        // Report the value with the exact W^{1,p} norm in the denominator.
        DiscreteField field(spec.mesh, std::move(m.u));
        const double value = coercivity_quotient(spec, th, field);
        if (value < best.c0) {
            best.c0 = value;
            best.minimizer = std::move(field);
            best.converged = m.converged;
            best.best_start = s;
        }
    }
    best.positive = best.c0 > 0.0;
    return best;
}

}  // namespace robinp
