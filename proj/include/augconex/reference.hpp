#pragma once

#include <augconex/qcqp.hpp>
#include <augconex/solver.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace augconex {

struct CompositeMinimizeResult {
    Vec x;
    double value = 0;      // smooth(x) + chi_0(x)
    double stationarity = 0; // norm of the gradient mapping at exit
    int iterations = 0;
};

/// FISTA with backtracking and gradient-based restart for
///   min smooth(x) + chi_0(x) over the ball.
inline CompositeMinimizeResult
minimize_composite(const std::function<double(const Vec &)> &smooth,
                   const std::function<Vec(const Vec &)> &grad, const CompositeTerms &terms,
                   const BallDomain &dom, const Vec &x0, double L0, double tol, int max_iter) {
    const Index m = 0;
    CompositeMinimizeResult res;
    Vec x = dom.project(x0);
    Vec z = x, x_old = x;
    double t = 1;
    double L = std::max(L0, 1e-8);
    for (int it = 0; it < max_iter; ++it) {
        ++res.iterations;
        const Vec gz = grad(z);
        const double fz = smooth(z);
        Vec xn;
        for (;;) {
            xn = composite_prox(terms, dom, ProxRequest{Vec::Zero(m), gz, z, L});
            const Vec d = xn - z;
            if (smooth(xn) <= fz + gz.dot(d) + 0.5 * L * d.squaredNorm() + 1e-15 * std::abs(fz))
                break;
            L *= 2;
        }
        res.stationarity = L * (xn - z).norm();
        const double tn = 0.5 * (1 + std::sqrt(1 + 4 * t * t));
        Vec zn = xn + ((t - 1) / tn) * (xn - x_old);
        if ((z - xn).dot(xn - x_old) > 0) {
            zn = xn;
            t = 1;
        } else {
            t = tn;
        }
        x_old = x = xn;
        z = zn;
        L *= 0.9;
        if (res.stationarity <= tol)
            break;
    }
    res.x = x;
    res.value = smooth(x) + terms.objective_value(x);
    return res;
}

struct AlmOptions {
    double tol = 1e-10; // stationarity, feasibility and complementarity
    int max_outer = 60;
    int max_inner = 20000;
    double penalty = 10;
};

struct AlmResult {
    Vec x;
    Vec y;
    double value = 0;
    double feasibility = 0;
    int outer_iterations = 0;
    long inner_iterations = 0;
};

/// Classical augmented Lagrangian method with accelerated proximal-gradient
/// inner solves. Deterministic gradients only; f must be smooth.
template <ConstrainedProblem P>
AlmResult solve_alm(const P &p, const Vec &x_start, const AlmOptions &opts = {}) {
    const Index m = p.num_constraints();
    double r = opts.penalty;
    Vec y = Vec::Zero(m);

    auto merit = [&](const Vec &x) {
        const Vec g = p.constraint_values(x);
        return p.objective_value(x) +
               ((y + r * g).cwiseMax(0.0).squaredNorm() - y.squaredNorm()) / (2 * r);
    };
    auto merit_grad = [&](const Vec &x) -> Vec {
        const Vec g = p.constraint_values(x);
        return p.objective_gradient(x) + p.constraint_jacobian(x) * (y + r * g).cwiseMax(0.0);
    };

    AlmResult res;
    Vec x = p.domain().project(x_start);
    double prev_viol = std::numeric_limits<double>::infinity();
    for (int outer = 0; outer < opts.max_outer; ++outer) {
        const auto inner = minimize_composite(merit, merit_grad, p.composite(), p.domain(), x,
                                              std::max(1.0, p.smoothness().smooth), opts.tol,
                                              opts.max_inner);
        res.inner_iterations += inner.iterations;
        x = inner.x;
        const Vec g = p.constraint_values(x);
        y = (y + r * g).cwiseMax(0.0);
        const double viol = g.cwiseMax(0.0).norm();
        const double compl_ = m == 0 ? 0.0 : (y.array() * g.array()).abs().maxCoeff();
        res.outer_iterations = outer + 1;
        if (viol <= opts.tol && compl_ <= opts.tol && inner.stationarity <= 10 * opts.tol)
            break;
        if (viol > 0.25 * prev_viol)
            r *= 5;
        prev_viol = viol;
    }
    res.x = x;
    res.y = y;
    res.value = p.objective_value(x) + p.composite().objective_value(x);
    res.feasibility = feasibility_gap(p, x);
    return res;
}

/// Lower bound on the optimal value from weak duality:
///   min_{x in X} psi_0(x) + y^T psi(x)  <=  psi_0*   for any y >= 0.
/// The inner minimum is approximated by FISTA and corrected by the
/// gradient-mapping norm times the domain diameter.
template <ConstrainedProblem P>
double dual_lower_bound(const P &p, const Vec &y, double tol = 1e-11, int max_iter = 50000) {
    auto phi = [&](const Vec &x) {
        return p.objective_value(x) + (p.num_constraints() ? y.dot(p.constraint_values(x)) : 0.0);
    };
    auto grad = [&](const Vec &x) -> Vec {
        Vec g = p.objective_gradient(x);
        if (p.num_constraints())
            g += p.constraint_jacobian(x) * y;
        return g;
    };
    const auto res = minimize_composite(phi, grad, p.composite(), p.domain(), Vec::Zero(p.dim()),
                                        std::max(1.0, p.smoothness().smooth), tol, max_iter);
    return res.value - 2 * p.domain().radius * res.stationarity;
}

struct ReferenceSolution {
    Vec x;                  // reference minimizer
    Vec y;                  // its multiplier
    double value = 0;       // psi_0(x)
    double feasibility = 0;
    double dual_bound = 0;  // certified lower bound on psi_0*
    Vec run_x;              // last iterate of the long deterministic Aug-ConEx run
    double run_value = 0;
    bool run_checked = false; // whether run_value had to agree with value
};

struct ReferenceOptions {
    int horizon_multiplier = 20;
    int min_run_iterations = 20000; // floor on the deterministic run length
    double agreement_tol = 1e-4;
    double feasibility_tol = 1e-8;
};

/// Reference optimum of a QCQP instance for gap metrics.
///
/// The reference point comes from `solve_alm` started away from the origin
/// and is accepted only if (a) it is feasible to `feasibility_tol` and (b) the
/// weak-duality bound of its multiplier lies within `agreement_tol`. A
/// deterministic Aug-ConEx run of `horizon_multiplier * horizon` iterations
/// (at least `min_run_iterations`),
/// using the strongly convex policy with the exact smallest eigenvalue of A_0,
/// is also recorded; when `strongly_convex` it must agree with the reference
/// to `agreement_tol` as well. Any failed check throws UnreliableReference.
inline ReferenceSolution reference_solution(const QcqpInstance &inst, int horizon,
                                            bool strongly_convex,
                                            const ReferenceOptions &opts = {}) {
    const QcqpProblem p(inst, L1Handling::prox, false, 0.0);
    const Index n = p.dim(), m = p.num_constraints();

    ReferenceSolution ref;
    const Vec start = Vec::Constant(n, 0.5 * inst.radius / std::sqrt(double(n)));
    const AlmResult alm = solve_alm(p, start);
    ref.x = alm.x;
    ref.y = alm.y;
    ref.value = alm.value;
    ref.feasibility = alm.feasibility;
    ref.dual_bound = dual_lower_bound(p, alm.y);

    if (!(ref.feasibility <= opts.feasibility_tol))
        throw UnreliableReference("reference point infeasible: " + std::to_string(ref.feasibility));
    if (!(ref.value - ref.dual_bound <= opts.agreement_tol))
        throw UnreliableReference("duality gap of reference too large: " +
                                  std::to_string(ref.value - ref.dual_bound));

    Eigen::SelfAdjointEigenSolver<Mat> eig(inst.A[0], Eigen::EigenvaluesOnly);
    const double mu = eig.eigenvalues().minCoeff();
    ScheduleParams sp;
    sp.horizon = std::max({2, opts.horizon_multiplier * horizon, opts.min_run_iterations + 1});
    sp.constraints = aggregate_constants(p.constraint_profile());
    sp.objective = p.smoothness();
    sp.radius = inst.radius;
    if (mu > 1e-12) {
        sp.mode = Mode::strongly_convex;
        sp.objective.strong_convexity = mu;
    }
    const RunResult rr = run(p, StepSchedule(sp), Vec::Zero(n), Vec::Zero(m));
    ref.run_x = rr.x_last;
    ref.run_value = eval_objective(p, rr.x_last);
    ref.run_checked = strongly_convex;
    if (strongly_convex && !(std::abs(ref.run_value - ref.value) <= opts.agreement_tol))
        throw UnreliableReference("deterministic run disagrees with reference: " +
                                  std::to_string(ref.run_value) + " vs " + std::to_string(ref.value));
    return ref;
}

} // namespace augconex
