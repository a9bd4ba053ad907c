#pragma once

#include "tvdp/distribution.hpp"

#include <span>
#include <vector>

namespace tvdp {

/// Solves (I - discount * P) v = cost, where row x of P is rows[x].
/// LU with partial pivoting; the system is non-singular for discount < 1.
std::vector<double> solve_discounted_evaluation(std::span<const FiniteDistribution> rows,
                                                std::span<const double> cost, double discount);

}  // namespace tvdp
