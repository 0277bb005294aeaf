#include "robinp/reaction.hpp"

#include "robinp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace robinp {

namespace {

double norm(const Vec2& y) { return std::hypot(y[0], y[1]); }

double power(double x, double e) { return std::pow(x, e); }

std::vector<Vec2> sample_directions(int dim) {
    if (dim == 1) return {{1.0, 0.0}, {-1.0, 0.0}};
    return {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
}

std::string describe(const HypothesisWitness& w) {
    std::ostringstream os;
    os.precision(6);
    os << "node " << w.node << " z=(" << w.z[0] << "," << w.z[1] << ") x=" << w.x << " |y|=" << norm(w.y)
       << " margin=" << w.margin;
    return os.str();
}

}  // namespace

void ExampleReactionParams::validate(std::optional<double> lambda1) const {
    if (!(p > 1.0)) throw InvalidArgument("example reaction: p must exceed 1");
    if (!(tau > 1.0 && q > 1.0 && tau < p && q < p && p < r)) {
        throw InvalidArgument("example reaction: require 1 < tau, q < p < r");
    }
    if (lambda1) {
        if (!(theta < *lambda1 && *lambda1 < eta)) {
            std::ostringstream os;
            os << "example reaction: require theta < lambda1 < eta (theta=" << theta << ", lambda1=" << *lambda1
               << ", eta=" << eta << ")";
            throw HypothesisViolated(os.str());
        }
    }
}

ReactionSpec zero_reaction() {
    ReactionSpec spec;
    spec.eval = [](const Point&, double, const Vec2&) { return 0.0; };
    spec.eval_dx = [](const Point&, double, const Vec2&) { return 0.0; };
    spec.description = "zero";
    return spec;
}

ReactionSpec linear_reaction(double coefficient, double p) {
    ReactionSpec spec;
    spec.eval = [coefficient, p](const Point&, double x, const Vec2&) { return coefficient * power(x, p - 1.0); };
    spec.eval_dx = [coefficient, p](const Point&, double x, const Vec2&) {
        return coefficient * (p - 1.0) * power(x, p - 2.0);
    };
    std::ostringstream os;
    os << "linear(" << coefficient << ")";
    spec.description = os.str();
    return spec;
}

ReactionSpec example_reaction(const ExampleReactionParams& params) {
    params.validate();
    const ExampleReactionParams c = params;
    ReactionSpec spec;
    spec.eval = [c](const Point&, double x, const Vec2& y) {
        const double gy = power(norm(y), c.p - 1.0);
        if (x <= 1.0) {
            return c.eta * power(x, c.p - 1.0) + power(x, c.r - 1.0) * gy;
        }
        return c.theta * power(x, c.p - 1.0) + (c.eta - c.theta) * power(x, c.q - 1.0) + power(x, c.tau - 1.0) * gy;
    };
    spec.eval_dx = [c](const Point&, double x, const Vec2& y) {
        const double gy = power(norm(y), c.p - 1.0);
        if (x <= 1.0) {
            return c.eta * (c.p - 1.0) * power(x, c.p - 2.0) + (c.r - 1.0) * power(x, c.r - 2.0) * gy;
        }
        return c.theta * (c.p - 1.0) * power(x, c.p - 2.0) + (c.eta - c.theta) * (c.q - 1.0) * power(x, c.q - 2.0) +
               (c.tau - 1.0) * power(x, c.tau - 2.0) * gy;
    };
    std::ostringstream os;
    os << "example(eta=" << c.eta << ", theta=" << c.theta << ", q=" << c.q << ", tau=" << c.tau << ", r=" << c.r
       << ", p=" << c.p << ")";
    spec.description = os.str();
    return spec;
}

double evaluate(const ReactionSpec& spec, const Point& z, double x, const Vec2& y) {
    if (!(x > 0.0)) {
        if (std::isnan(x)) throw EvaluationError("reaction evaluated at NaN", z, x, y);
        return 0.0;
    }
    const double v = spec.eval(z, x, y);
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "reaction '" << spec.description << "' is not finite at z=(" << z[0] << "," << z[1] << "), x=" << x
           << ", y=(" << y[0] << "," << y[1] << ")";
        throw EvaluationError(os.str(), z, x, y);
    }
    return v;
}

double evaluate_hat(const ReactionSpec& spec, double p, const Point& z, double x, const Vec2& y) {
    return evaluate(spec, z, x, y) + power(std::max(x, 0.0), p - 1.0);
}

double evaluate_dx(const ReactionSpec& spec, const Point& z, double x, const Vec2& y) {
    if (x < 0.0) return 0.0;
    double v = 0.0;
    if (spec.eval_dx && x > 0.0) {
        v = spec.eval_dx(z, x, y);
    } else {
        const double h = 1e-6 * (1.0 + std::abs(x));
        v = (evaluate(spec, z, x + h, y) - evaluate(spec, z, x - h, y)) / (2.0 * h);
    }
    if (!std::isfinite(v)) {
        throw EvaluationError("reaction derivative is not finite", z, x, y);
    }
    return v;
}

std::vector<double> SampleGrid::x_samples() const {
    const int decades = static_cast<int>(std::lround(std::log10(x_max / x_min)));
    const int n = decades * points_per_decade;
    std::vector<double> xs(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        xs[static_cast<std::size_t>(k)] = x_min * std::pow(10.0, static_cast<double>(k) / points_per_decade);
    }
    xs.back() = x_max;
    return xs;
}

std::vector<double> SampleGrid::y_magnitudes() const {
    const int decades = static_cast<int>(std::lround(std::log10(y_max / y_min)));
    const int n = decades * points_per_decade;
    std::vector<double> ys{0.0};
    for (int k = 0; k <= n; ++k) {
        ys.push_back(y_min * std::pow(10.0, static_cast<double>(k) / points_per_decade));
    }
    ys.back() = y_max;
    return ys;
}

double SampleGrid::resolved_gap(double lambda1) const {
    if (strict_gap >= 0.0) return strict_gap;
    return lambda1 > 0.0 ? 1e-3 * lambda1 : 1e-6;
}

HypothesisReport check_growth(const ReactionSpec& spec, double p, const Mesh& mesh, const SampleGrid& grid) {
    const auto xs = grid.x_samples();
    const auto ys = grid.y_magnitudes();
    const auto dirs = sample_directions(mesh.dim());
    const double x_top = grid.x_max / 10.0, x_prev = grid.x_max / 100.0;
    const double y_top = grid.y_max / 10.0, y_prev = grid.y_max / 100.0;
    // Small slack so decade boundaries survive the log-spacing round-off.
    const auto at_least = [](double v, double bound) { return v >= bound * (1.0 - 1e-12); };

    HypothesisReport report;
    report.id = "i";
    report.sampled_bound.assign(mesh.num_nodes(), 0.0);

    double sup_x_top = 0.0, sup_x_prev = 0.0, sup_y_top = 0.0, sup_y_prev = 0.0;
    HypothesisWitness worst_x, worst_y, worst_a;
    bool bound_violated = false;
    HypothesisWitness bound_witness;

    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        const Point& z = mesh.node(i);
        double a = 0.0;
        for (double x : xs) {
            for (double s : ys) {
                for (const Vec2& d : dirs) {
                    if (s == 0.0 && &d != &dirs.front()) continue;
                    const Vec2 y{s * d[0], s * d[1]};
                    const double denom = 1.0 + power(x, p - 1.0) + power(s, p - 1.0);
                    const double ratio = std::abs(evaluate(spec, z, x, y)) / denom;
                    const HypothesisWitness w{i, z, x, y, ratio};
                    if (ratio > a) {
                        a = ratio;
                        if (ratio > worst_a.margin) worst_a = w;
                    }
                    if (at_least(x, x_top)) {
                        if (ratio > sup_x_top) {
                            sup_x_top = ratio;
                            worst_x = w;
                        }
                    } else if (at_least(x, x_prev)) {
                        sup_x_prev = std::max(sup_x_prev, ratio);
                    }
                    if (at_least(s, y_top)) {
                        if (ratio > sup_y_top) {
                            sup_y_top = ratio;
                            worst_y = w;
                        }
                    } else if (at_least(s, y_prev)) {
                        sup_y_prev = std::max(sup_y_prev, ratio);
                    }
                    if (!spec.growth_a.empty() && ratio > spec.growth_a[i] * (1.0 + 1e-12) && !bound_violated) {
                        bound_violated = true;
                        bound_witness = w;
                    }
                }
            }
        }
        report.sampled_bound[i] = a;
    }

    const auto tail = [](double top, double prev) {
        if (top == 0.0) return 0.0;
        if (prev == 0.0) return std::numeric_limits<double>::infinity();
        return top / prev;
    };
    const double tail_x = tail(sup_x_top, sup_x_prev);
    const double tail_y = tail(sup_y_top, sup_y_prev);
    const double limit = 1.0 + grid.tail_tolerance;

    std::ostringstream os;
    os.precision(6);
    if (tail_x > limit || tail_y > limit) {
        report.pass = false;
        report.witness = tail_x >= tail_y ? worst_x : worst_y;
        report.witness.margin = std::max(tail_x, tail_y);
        os << "growth ratio increases across the top decades (x tail " << tail_x << ", |y| tail " << tail_y
           << "); " << describe(report.witness);
    } else if (bound_violated) {
        report.pass = false;
        report.witness = bound_witness;
        os << "sampled ratio exceeds the supplied a(z); " << describe(bound_witness);
    } else {
        report.pass = true;
        report.witness = worst_a;
        os << "a_max=" << worst_a.margin << " (x tail " << tail_x << ", |y| tail " << tail_y << ")";
    }
    report.detail = os.str();
    return report;
}

HypothesisReport check_limsup_at_infinity(const ReactionSpec& spec, double p, double lambda1, const Mesh& mesh,
                                          const SampleGrid& grid) {
    const auto ys = grid.y_magnitudes();
    const auto dirs = sample_directions(mesh.dim());
    const double x = grid.x_max;
    const double scale = power(x, p - 1.0);
    const double gap = grid.resolved_gap(lambda1);

    HypothesisReport report;
    report.id = "ii";
    report.sampled_bound.assign(mesh.num_nodes(), 0.0);
    HypothesisWitness worst;
    worst.margin = std::numeric_limits<double>::infinity();
    bool strict_somewhere = false;

    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        const Point& z = mesh.node(i);
        double theta = -std::numeric_limits<double>::infinity();
        HypothesisWitness at_node;
        for (double s : ys) {
            for (const Vec2& d : dirs) {
                const Vec2 y{s * d[0], s * d[1]};
                const double ratio = evaluate(spec, z, x, y) / scale;
                if (ratio > theta) {
                    theta = ratio;
                    at_node = {i, z, x, y, lambda1 - ratio};
                }
            }
        }
        report.sampled_bound[i] = theta;
        if (at_node.margin < worst.margin) worst = at_node;
        if (theta <= lambda1 - gap) strict_somewhere = true;
    }

    report.witness = worst;
    std::ostringstream os;
    os.precision(8);
    if (worst.margin < -grid.tol) {
        report.pass = false;
        os << "f/x^{p-1} exceeds lambda1=" << lambda1 << " at the tail; " << describe(worst);
    } else if (!strict_somewhere) {
        report.pass = false;
        os << "theta_hat is within the strict gap " << gap << " of lambda1 at every node; " << describe(worst);
    } else {
        report.pass = true;
        os << "theta_hat_max=" << lambda1 - worst.margin << " <= lambda1=" << lambda1;
    }
    report.detail = os.str();
    return report;
}

HypothesisReport check_liminf_at_zero(const ReactionSpec& spec, double p, double lambda1, double M, const Mesh& mesh,
                                      const SampleGrid& grid) {
    if (!(M >= 0.0)) throw InvalidArgument("check_liminf_at_zero: M must be nonnegative");
    std::vector<double> ys;
    for (double s : grid.y_magnitudes()) {
        if (s <= M) ys.push_back(s);
    }
    if (ys.back() < M) ys.push_back(M);
    const auto dirs = sample_directions(mesh.dim());
    const double x = grid.x_min;
    const double scale = power(x, p - 1.0);
    const double gap = grid.resolved_gap(lambda1);

    HypothesisReport report;
    report.id = "iii";
    report.sampled_bound.assign(mesh.num_nodes(), 0.0);
    HypothesisWitness worst;
    worst.margin = std::numeric_limits<double>::infinity();
    bool strict_somewhere = false;

    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        const Point& z = mesh.node(i);
        double eta = std::numeric_limits<double>::infinity();
        HypothesisWitness at_node;
        for (double s : ys) {
            for (const Vec2& d : dirs) {
                const Vec2 y{s * d[0], s * d[1]};
                const double ratio = evaluate(spec, z, x, y) / scale;
                if (ratio < eta) {
                    eta = ratio;
                    at_node = {i, z, x, y, ratio - lambda1};
                }
            }
        }
        report.sampled_bound[i] = eta;
        if (at_node.margin < worst.margin) worst = at_node;
        if (eta >= lambda1 + gap) strict_somewhere = true;
    }

    report.witness = worst;
    std::ostringstream os;
    os.precision(8);
    if (worst.margin < -grid.tol) {
        report.pass = false;
        os << "f/x^{p-1} falls below lambda1=" << lambda1 << " near zero; " << describe(worst);
    } else if (!strict_somewhere) {
        report.pass = false;
        os << "eta_hat is within the strict gap " << gap << " of lambda1 at every node; " << describe(worst);
    } else {
        report.pass = true;
        os << "eta_hat_min=" << lambda1 + worst.margin << " >= lambda1=" << lambda1;
    }
    report.detail = os.str();
    return report;
}

}  // namespace robinp
