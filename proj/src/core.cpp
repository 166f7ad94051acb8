#include "incades/core.hpp"

#include <cmath>

namespace incades {

double canberra(const FeatureVector& a, const FeatureVector& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("canberra: dimension mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::fabs(a[i]) + std::fabs(b[i]);
        if (denom == 0.0) continue;  // both zero: term is defined as 0
        total += std::fabs(a[i] - b[i]) / denom;
    }
    return total;
}

double euclidean(const FeatureVector& a, const FeatureVector& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("euclidean: dimension mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        total += d * d;
    }
    return std::sqrt(total);
}

}  // namespace incades
