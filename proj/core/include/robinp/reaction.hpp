#pragma once

#include "robinp/mesh.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace robinp {

/// f(z, x, y): z a point of the domain, x the value, y the gradient.
using ReactionFn = std::function<double(const Point& z, double x, const Vec2& y)>;

/// A Caratheodory reaction with optional analytic x-derivative.
///
/// The user function is only ever called for x > 0; evaluate() applies the
/// truncation f = 0 for x <= 0 itself. Functions must be pure and reentrant.
struct ReactionSpec {
    ReactionFn eval;
    /// Optional partial derivative in x; central differences are used when empty.
    ReactionFn eval_dx;
    /// Optional nodal growth bound a(z) for |f| <= a(z)(1 + x^{p-1} + |y|^{p-1}).
    std::vector<double> growth_a;
    std::string description;
};

/// Parameters of the piecewise reaction
///   eta x^{p-1} + x^{r-1}|y|^{p-1}                            0 <= x <= 1
///   theta x^{p-1} + (eta - theta) x^{q-1} + x^{tau-1}|y|^{p-1}  x > 1
/// with 1 < tau, q < p < r and theta < lambda1 < eta.
struct ExampleReactionParams {
    double eta = 3.0;
    double theta = 1.0;
    double q = 1.5;
    double tau = 1.001;
    double r = 3.0;
    double p = 2.0;

    /// Checks the exponent ordering, and theta < lambda1 < eta when lambda1 is given.
    void validate(std::optional<double> lambda1 = std::nullopt) const;
};

[[nodiscard]] ReactionSpec zero_reaction();
/// f = c x^{p-1} for x > 0.
[[nodiscard]] ReactionSpec linear_reaction(double coefficient, double p);
[[nodiscard]] ReactionSpec example_reaction(const ExampleReactionParams& params);

/// Truncated evaluation: 0 for x <= 0, otherwise spec.eval. Throws EvaluationError on NaN/inf.
[[nodiscard]] double evaluate(const ReactionSpec& spec, const Point& z, double x, const Vec2& y);
/// Shifted reaction f + (x^+)^{p-1}.
[[nodiscard]] double evaluate_hat(const ReactionSpec& spec, double p, const Point& z, double x, const Vec2& y);
/// d/dx of the truncated reaction.
[[nodiscard]] double evaluate_dx(const ReactionSpec& spec, const Point& z, double x, const Vec2& y);

/// Log-spaced sampling box used by the hypothesis auditors.
struct SampleGrid {
    double x_min = 1e-6;
    double x_max = 1e6;
    int points_per_decade = 8;
    /// |y| is sampled at 0 and log-spaced on [y_min, y_max].
    double y_min = 1e-3;
    double y_max = 1e3;
    /// Relative stability threshold for the growth tail.
    double tail_tolerance = 1e-2;
    /// Slack for "<= lambda1" / ">= lambda1" comparisons.
    double tol = 1e-9;
    /// Strict gap proxying the "not identically lambda1" clauses. Negative selects
    /// 1e-3*lambda1, or 1e-6 when lambda1 = 0.
    double strict_gap = -1.0;

    [[nodiscard]] std::vector<double> x_samples() const;
    [[nodiscard]] std::vector<double> y_magnitudes() const;
    [[nodiscard]] double resolved_gap(double lambda1) const;
};

struct HypothesisWitness {
    std::size_t node = 0;
    Point z{};
    double x = 0.0;
    Vec2 y{};
    double margin = 0.0;
};

struct HypothesisReport {
    /// "i", "ii" or "iii".
    std::string id;
    bool pass = false;
    HypothesisWitness witness;
    /// Per-node estimate: a(z) for (i), theta(z) for (ii), eta_M(z) for (iii).
    std::vector<double> sampled_bound;
    std::string detail;
};

/// Sup of |f| / (1 + x^{p-1} + |y|^{p-1}) per node; passes when finite and the
/// sup does not grow across the top two decades of x and of |y|.
[[nodiscard]] HypothesisReport check_growth(const ReactionSpec& spec, double p, const Mesh& mesh,
                                            const SampleGrid& grid = {});

/// theta_hat(z) = max_y f(z, x_max, y) / x_max^{p-1}; passes when theta_hat <= lambda1
/// everywhere and theta_hat <= lambda1 - gap somewhere.
[[nodiscard]] HypothesisReport check_limsup_at_infinity(const ReactionSpec& spec, double p, double lambda1,
                                                        const Mesh& mesh, const SampleGrid& grid = {});

/// eta_hat(z) = min_{|y| <= M} f(z, x_min, y) / x_min^{p-1}; passes when eta_hat >= lambda1
/// everywhere and eta_hat >= lambda1 + gap somewhere.
[[nodiscard]] HypothesisReport check_liminf_at_zero(const ReactionSpec& spec, double p, double lambda1, double M,
                                                    const Mesh& mesh, const SampleGrid& grid = {});

}  // namespace robinp
