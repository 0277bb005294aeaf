#pragma once

#include "robinp/eigenproblem.hpp"

#include <span>
#include <vector>

namespace robinp {

/// Default positivity floor for the quotient u1^p / u^{p-1}.
inline constexpr double kPiconeFloor = 1e-12;

enum class CollapseVerdict { Healthy, CollapseSuspected };

[[nodiscard]] const char* to_string(CollapseVerdict v) noexcept;

struct PiconeReport {
    double integral = 0.0;
    double min_pointwise = 0.0;
    std::size_t quadrature_points = 0;
    /// int (eta_M - lambda1) u1^p dz.
    double xi_star = 0.0;
    CollapseVerdict collapse_flag = CollapseVerdict::Healthy;
};

/// Density R(u1, u) = |Du1|^p - |Du|^{p-2} (Du, D(u1^p / u^{p-1})) at element
/// barycenters, one value per element, using interpolated values and the
/// elementwise gradients. Throws PositivityRequired if u <= floor at a node.
[[nodiscard]] std::vector<double> picone_density(const ProblemSpec& spec, const DiscreteField& u1,
                                                 const DiscreteField& u, double floor = kPiconeFloor);

/// Point form of the density for given values and gradients.
[[nodiscard]] double picone_point(double p, double u1, const Vec2& du1, double u, const Vec2& du) noexcept;

/// sum_K |K| R_K.
[[nodiscard]] double picone_integral(const ProblemSpec& spec, const DiscreteField& u1, const DiscreteField& u,
                                     double floor = kPiconeFloor);

/// xi* = int (eta_M - lambda1) u1^p with the lumped rule.
[[nodiscard]] double xi_star(const EigenPair& eigen, std::span<const double> eta_M, double p);

struct CollapseOptions {
    /// Relative collapse floor: collapse is suspected when max|u| < floor_factor * max|u1|.
    double floor_factor = 1e-6;
};

/// Non-collapse test. Throws HypothesisViolated when xi* <= 0. The Picone
/// integral is left as NaN if u is not strictly positive.
[[nodiscard]] PiconeReport collapse_test(const ProblemSpec& spec, const EigenPair& eigen, const DiscreteField& u,
                                         std::span<const double> eta_M, const CollapseOptions& opts = {});

/// Same measurements without the xi* gate; used to keep monitoring when the
/// hypothesis is already known to fail.
[[nodiscard]] PiconeReport collapse_measure(const ProblemSpec& spec, const EigenPair& eigen, const DiscreteField& u,
                                            std::span<const double> eta_M, const CollapseOptions& opts = {});

}  // namespace robinp
