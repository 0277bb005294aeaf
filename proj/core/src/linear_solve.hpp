#pragma once

#include "robinp/assembly.hpp"

#include <span>
#include <vector>

namespace robinp::detail {

/// Solves m x = b by sparse LU with one refinement step. Throws LinearSolveFailed
/// unless the normwise backward error ||m x - b|| / (||m|| ||x|| + ||b||) is <= 1e-12.
[[nodiscard]] std::vector<double> sparse_solve(const SparseMatrix& m, std::span<const double> b);

[[nodiscard]] double max_abs(std::span<const double> v);
[[nodiscard]] double dot(std::span<const double> a, std::span<const double> b);

}  // namespace robinp::detail
