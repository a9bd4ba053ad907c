#include "tvdp/linalg.hpp"

#include <Eigen/Dense>

#include <stdexcept>

namespace tvdp {

std::vector<double> solve_discounted_evaluation(std::span<const FiniteDistribution> rows,
                                                std::span<const double> cost, double discount) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (static_cast<std::size_t>(n) != cost.size()) {
        throw DimensionError("evaluation: cost vector does not match the row count");
    }
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != n) {
            throw DimensionError("evaluation: transition row has the wrong length");
        }
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) -= discount * row[static_cast<std::size_t>(j)];
    }
    const Eigen::Map<const Eigen::VectorXd> b(cost.data(), n);
    const Eigen::VectorXd v = a.partialPivLu().solve(b);
    return {v.data(), v.data() + n};
}

}  // namespace tvdp
