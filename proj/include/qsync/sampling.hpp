#pragma once

// Deterministic sampling support: Halton low-discrepancy points over boxes
// and stable per-run seed derivation for concurrent sweeps.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace qsync {

/// Deterministic 64-bit mix; used to derive independent RNG streams from
/// (master seed, run index) without correlation between adjacent indices.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace detail {

inline double halton(std::uint64_t index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

inline int nth_prime(int n) {
    static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101,
                                 103, 107, 109, 113, 127, 131, 137, 139, 149, 151};
    if (n < 0 || n >= static_cast<int>(std::size(primes)))
        throw std::invalid_argument("halton dimension exceeds prime table");
    return primes[n];
}

}  // namespace detail

/// Points of the d-dimensional Halton sequence mapped into [lower, upper],
/// skipping the first few terms of each radical-inverse stream.
inline std::vector<Eigen::VectorXd> halton_box_points(const Eigen::VectorXd& lower,
                                                      const Eigen::VectorXd& upper,
                                                      int count) {
    if (lower.size() != upper.size())
        throw std::invalid_argument("halton_box_points: bound dimensions differ");
    const int dim = static_cast<int>(lower.size());
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) {
        Eigen::VectorXd x(dim);
        for (int d = 0; d < dim; ++d) {
            const double u = detail::halton(static_cast<std::uint64_t>(k) + 17,
                                            detail::nth_prime(d));
            x(d) = lower(d) + u * (upper(d) - lower(d));
        }
        pts.push_back(std::move(x));
    }
    return pts;
}

/// Uniform random points in [lower, upper] from a seeded generator.
inline std::vector<Eigen::VectorXd> uniform_box_points(const Eigen::VectorXd& lower,
                                                       const Eigen::VectorXd& upper,
                                                       int count, std::uint64_t seed) {
    if (lower.size() != upper.size())
        throw std::invalid_argument("uniform_box_points: bound dimensions differ");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) {
        Eigen::VectorXd x(lower.size());
        for (Eigen::Index d = 0; d < lower.size(); ++d)
            x(d) = lower(d) + unit(rng) * (upper(d) - lower(d));
        pts.push_back(std::move(x));
    }
    return pts;
}

}  // namespace qsync
