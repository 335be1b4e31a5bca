#pragma once

// Seeded generators and independent reference computations for the test suites.

#include <augconex/qcqp.hpp>
#include <augconex/solver.hpp>

#include <cmath>
#include <functional>
#include <random>

namespace testing_support {

using augconex::Index;
using augconex::Mat;
using augconex::Rng;
using augconex::Vec;

inline Vec normal_vec(Rng &rng, Index n, double scale = 1) {
    std::normal_distribution<double> nd(0.0, scale);
    Vec v(n);
    for (Index i = 0; i < n; ++i)
        v[i] = nd(rng);
    return v;
}

inline double uniform(Rng &rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Uniform-ish point strictly inside the ball of radius r.
inline Vec point_in_ball(Rng &rng, Index n, double r) {
    Vec v = normal_vec(rng, n);
    return v.normalized() * r * uniform(rng, 0.0, 0.999);
}

/// Hand-built instance; matrices given directly.
inline augconex::QcqpInstance manual_instance(Mat A0, Vec b0, std::vector<Mat> A, std::vector<Vec> b,
                                              Vec c, double lambda, double radius) {
    augconex::QcqpInstance q;
    q.A.push_back(std::move(A0));
    q.b.push_back(std::move(b0));
    for (std::size_t i = 0; i < A.size(); ++i) {
        q.A.push_back(std::move(A[i]));
        q.b.push_back(std::move(b[i]));
    }
    q.c = std::move(c);
    q.lambda = lambda;
    q.radius = radius;
    return q;
}

/// Golden-section minimizer of a unimodal scalar function on [lo, hi].
inline double golden_min(const std::function<double(double)> &f, double lo, double hi, int iters = 200) {
    const double g = (std::sqrt(5.0) - 1) / 2;
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

/// Point where a nondecreasing function crosses zero on [lo, hi], by
/// bisection: the smallest t with g(t) >= 0. Used with right derivatives of
/// convex scalar functions to locate minimizers to machine precision.
inline double monotone_root(const std::function<double(double)> &g, double lo, double hi) {
    if (g(lo) >= 0)
        return lo;
    if (g(hi) < 0)
        return hi;
    for (int i = 0; i < 2000; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        (g(mid) >= 0 ? hi : lo) = mid;
    }
    return hi;
}

/// argmin_t lambda |t| + (t - u)^2 / 2 by scanning a grid, then refining.
inline double grid_soft_threshold(double u, double lambda) {
    auto f = [&](double t) { return lambda * std::abs(t) + 0.5 * (t - u) * (t - u); };
    const double span = std::abs(u) + 1;
    double best = 0, best_val = f(0);
    const int N = 20000;
    for (int i = 0; i <= N; ++i) {
        const double t = -span + 2 * span * i / N;
        if (f(t) < best_val) {
            best_val = f(t);
            best = t;
        }
    }
    const double h = 2 * span / N;
    const double refined = golden_min(f, best - h, best + h);
    return f(refined) < f(0) ? refined : 0.0; // the kink at 0 is an exact candidate
}

/// argmin lambda |x|_1 + |x - c|^2 / 2 over |x| <= D, computed without the
/// closed form: for a ball multiplier nu, each coordinate minimizes
/// lambda |t| + (t - c_i)^2 / 2 + nu t^2 / 2 by bisection on its right
/// derivative, and nu is found by bisection on |x(nu)| = D.
inline Vec l1_ball_oracle(const Vec &c, double lambda, double D) {
    auto solve_nu = [&](double nu) {
        Vec x(c.size());
        for (Index i = 0; i < c.size(); ++i) {
            // right derivative of lambda |t| + (t - c_i)^2 / 2 + nu t^2 / 2
            auto d = [&](double t) { return lambda * (t >= 0 ? 1 : -1) + (1 + nu) * t - c[i]; };
            const double r = std::abs(c[i]) + lambda + 1;
            x[i] = monotone_root(d, -r, r);
        }
        return x;
    };
    Vec x = solve_nu(0);
    if (x.norm() <= D)
        return x;
    double lo = 0, hi = 1;
    while (solve_nu(hi).norm() > D)
        hi *= 2;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        (solve_nu(mid).norm() > D ? lo : hi) = mid;
    }
    return solve_nu(hi);
}

/// Optimality residual of x for min lambda|x|_1 + |x - c|^2/2 over |x| <= D:
/// the distance from c - x to lambda d|x|_1 + N_ball(x), minimized over the
/// ball multiplier.
inline double l1_ball_kkt_residual(const Vec &x, const Vec &c, double lambda, double D) {
    auto dist = [&](double nu) {
        double acc = 0;
        for (Index i = 0; i < x.size(); ++i) {
            const double r = c[i] - (1 + nu) * x[i];
            double e;
            if (std::abs(x[i]) > 1e-14)
                e = r - lambda * (x[i] > 0 ? 1 : -1);
            else
                e = std::max(0.0, std::abs(r) - lambda);
            acc += e * e;
        }
        return std::sqrt(acc);
    };
    double res = dist(0);
    if (x.norm() >= D * (1 - 1e-12)) {
        const double nu = golden_min(dist, 0.0, 1e3 + c.norm() / std::max(D, 1e-12), 300);
        res = std::min(res, dist(nu));
    }
    if (x.norm() > D * (1 + 1e-12))
        res += x.norm() - D;
    return res;
}

/// Random solver state and workspace on a QCQP instance. The multiplier
/// iterate is nonnegative; V is an arbitrary vector.
struct RandomState {
    augconex::SolverState st;
    augconex::StepSizes steps;
};

inline RandomState random_state(const augconex::QcqpProblem &p, Rng &rng) {
    const Index n = p.dim(), m = p.num_constraints();
    const double D = p.domain().radius;
    RandomState r;
    r.st.k = 2;
    r.st.x = point_in_ball(rng, n, D);
    r.st.x_prev = point_in_ball(rng, n, D);
    r.st.xhat = point_in_ball(rng, n, D);
    r.st.V = normal_vec(rng, m, 2);
    r.st.ytilde = normal_vec(rng, m, 3).cwiseAbs();
    r.st.y = r.st.ytilde;
    r.st.ybar = r.st.ytilde;
    r.st.s = -normal_vec(rng, m).cwiseAbs();
    r.steps.tau = uniform(rng, 0.05, 1.0);
    r.steps.rho = std::exp(uniform(rng, std::log(1e-2), std::log(1e2)));
    r.steps.eta = r.steps.rho;
    const double c = augconex::aggregate_constants(p.constraint_profile()).coupling();
    r.steps.L = 2 * r.steps.rho * c * c; // the contraction threshold itself
    return r;
}

/// argmin_{s <= 0} -ytilde s + rho/2 (ell - s)^2 by bisection on the derivative.
inline double slack_oracle(double ytilde, double rho, double ell) {
    auto d = [&](double s) { return -ytilde - rho * (ell - s); };
    const double span = std::abs(ell) + std::abs(ytilde) / rho + 1;
    return monotone_root(d, -span, 0.0);
}

/// Accelerated gradient method on min f over the ball, written directly from
/// the extrapolation form: x_{k+1} = P(xhat_k - grad(xhat_k)/L_k),
/// xhat_{k+1} = x_{k+1} + beta_{k+1} (x_{k+1} - x_k).
inline std::vector<Vec> agd_iterates(const std::function<Vec(const Vec &)> &grad, double radius,
                                     const std::vector<double> &L, const std::vector<double> &beta,
                                     const Vec &x1, int iterations) {
    std::vector<Vec> xs{x1};
    Vec x = x1, xhat = x1;
    for (int k = 1; k <= iterations; ++k) {
        Vec y = xhat - grad(xhat) / L[std::size_t(k)];
        const double nrm = y.norm();
        if (nrm > radius)
            y *= radius / nrm;
        xhat = y + beta[std::size_t(k)] * (y - x);
        x = y;
        xs.push_back(x);
    }
    return xs;
}

} // namespace testing_support
