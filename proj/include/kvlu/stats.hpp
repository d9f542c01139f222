#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace kvlu::stats {

// Two-pass mean / population standard deviation. Values are shifted by the
// first element before summation, so constant inputs give sigma == 0 exactly.
struct Moments {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t n = 0;
};

inline Moments population_moments(std::span<const double> xs)
{
    Moments m;
    m.n = xs.size();
    if (xs.empty())
        return m;
    const double ref = xs.front();
    double sum = 0.0;
    for (double x : xs)
        sum += x - ref;
    const double shifted_mean = sum / static_cast<double>(xs.size());
    m.mean = ref + shifted_mean;
    double ss = 0.0;
    for (double x : xs) {
        const double d = (x - ref) - shifted_mean;
        ss += d * d;
    }
    m.stddev = std::sqrt(ss / static_cast<double>(xs.size()));
    return m;
}

inline double mean(std::span<const double> xs) { return population_moments(xs).mean; }

}  // namespace kvlu::stats
