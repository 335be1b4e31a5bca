#pragma once

#include <augconex/types.hpp>

#include <cmath>

namespace augconex {

struct PowerIterationOptions {
    double tol = 1e-13;
    int max_iterations = 20000;
    std::uint64_t seed = 0x5eed;
};

/// Largest eigenvalue of a symmetric PSD matrix (its spectral norm) by power
/// iteration with Rayleigh-quotient estimates.
inline double largest_eigenvalue_psd(const Mat &A, const PowerIterationOptions &opts = {}) {
    const Index n = A.rows();
    if (n == 0)
        return 0;
    Rng rng(opts.seed);
    std::normal_distribution<double> nd;
    Vec v(n);
    for (Index i = 0; i < n; ++i)
        v[i] = nd(rng);
    v.normalize();

    double lambda = 0;
    for (int it = 0; it < opts.max_iterations; ++it) {
        Vec w = A * v;
        const double est = v.dot(w);
        const double nrm = w.norm();
        if (nrm == 0)
            return 0;
        v = w / nrm;
        if (it > 0 && std::abs(est - lambda) <= opts.tol * std::max(1.0, std::abs(est))) {
            lambda = est;
            break;
        }
        lambda = est;
    }
    return lambda;
}

inline double spectral_norm_psd(const Mat &A, const PowerIterationOptions &opts = {}) {
    return largest_eigenvalue_psd(A, opts);
}

/// Smallest eigenvalue of a symmetric PSD matrix via power iteration on the
/// shifted matrix |A| I - A.
inline double smallest_eigenvalue_psd(const Mat &A, const PowerIterationOptions &opts = {}) {
    const double top = largest_eigenvalue_psd(A, opts);
    const Mat shifted = top * Mat::Identity(A.rows(), A.cols()) - A;
    return top - largest_eigenvalue_psd(shifted, opts);
}

} // namespace augconex
