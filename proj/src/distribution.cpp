#include "tvdp/distribution.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace tvdp {

FiniteDistribution::FiniteDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) {
        throw std::invalid_argument("distribution over an empty alphabet");
    }
    double total = 0.0;
    for (double& p : probs_) {
        if (!std::isfinite(p) || p < -kProbabilityTolerance || p > 1.0 + kProbabilityTolerance) {
            throw std::invalid_argument("probability entry outside [0, 1]: " + std::to_string(p));
        }
        if (p < 0.0) p = 0.0;
        total += p;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
        throw std::invalid_argument("probabilities sum to " + std::to_string(total) + ", not 1");
    }
}

FiniteDistribution FiniteDistribution::normalized(std::vector<double> weights) {
    double total = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) {
            throw std::invalid_argument("negative or non-finite weight");
        }
        total += w;
    }
    if (!(total > 0.0)) {
        throw std::invalid_argument("weights have zero total mass");
    }
    for (double& w : weights) w /= total;
    FiniteDistribution d;
    d.probs_ = std::move(weights);
    return d;
}

FiniteDistribution FiniteDistribution::dirac(std::size_t size, std::size_t index) {
    if (index >= size) throw std::out_of_range("dirac index out of range");
    std::vector<double> p(size, 0.0);
    p[index] = 1.0;
    return FiniteDistribution(std::move(p));
}

FiniteDistribution FiniteDistribution::uniform(std::size_t size) {
    if (size == 0) throw std::invalid_argument("distribution over an empty alphabet");
    return normalized(std::vector<double>(size, 1.0));
}

double FiniteDistribution::expectation(std::span<const double> l) const {
    if (l.size() != probs_.size()) {
        throw DimensionError("expectation: value vector has the wrong size");
    }
    return std::inner_product(probs_.begin(), probs_.end(), l.begin(), 0.0);
}

double tv_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("tv_distance: alphabet sizes differ");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

double tv_distance(const FiniteDistribution& a, const FiniteDistribution& b) {
    return tv_distance(a.probs(), b.probs());
}

}  // namespace tvdp
