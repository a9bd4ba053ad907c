#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace tvdp {

/// Tolerance applied to individual entries and to the total mass when a
/// probability vector is constructed.
inline constexpr double kProbabilityTolerance = 1e-12;

/// Thrown when two vectors that must share an alphabet have different sizes.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/**
 * Probability vector over a finite alphabet {0, ..., n-1}.
 *
 * Construction validates that every entry lies in [0, 1] and that the entries
 * sum to one, both within kProbabilityTolerance. Entries that are negative by
 * less than the tolerance are clamped to zero.
 */
class FiniteDistribution {
public:
    FiniteDistribution() = default;
    explicit FiniteDistribution(std::vector<double> probs);

    /// Rescales non-negative weights to unit mass. Throws if the total is not
    /// positive or any weight is negative.
    static FiniteDistribution normalized(std::vector<double> weights);

    /// Point mass on `index`.
    static FiniteDistribution dirac(std::size_t size, std::size_t index);

    static FiniteDistribution uniform(std::size_t size);

    [[nodiscard]] std::size_t size() const noexcept { return probs_.size(); }
    [[nodiscard]] bool empty() const noexcept { return probs_.empty(); }
    [[nodiscard]] double operator[](std::size_t i) const { return probs_[i]; }
    [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }
    [[nodiscard]] const std::vector<double>& vector() const noexcept { return probs_; }

    /// <l, this>
    [[nodiscard]] double expectation(std::span<const double> l) const;

    friend bool operator==(const FiniteDistribution&, const FiniteDistribution&) = default;

private:
    std::vector<double> probs_;
};

/// Unhalved l1 distance sum_x |a(x) - b(x)|, so the result lies in [0, 2].
double tv_distance(std::span<const double> a, std::span<const double> b);
double tv_distance(const FiniteDistribution& a, const FiniteDistribution& b);

}  // namespace tvdp
