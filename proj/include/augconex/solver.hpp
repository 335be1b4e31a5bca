#pragma once

#include <augconex/problem.hpp>
#include <augconex/prox.hpp>
#include <augconex/schedule.hpp>

#include <chrono>
#include <functional>
#include <string>
#include <vector>

namespace augconex {

/// Live iterates of the outer loop at iteration k.
struct SolverState {
    int k = 1;
    Vec x;      // x_k
    Vec x_prev; // x_{k-1}; equals x_1 at k = 1
    Vec xhat;   // extrapolated point the oracles are queried at
    Vec s;      // slack, <= 0
    Vec y;      // multiplier, >= 0
    Vec ytilde; // unclipped dual iterate
    Vec ybar;   // running multiplier average
    Vec V;      // g(x_k) + chi(x_k) - s_k
};

/// Data frozen for the fixed-point loop of one outer iteration. Building it
/// performs the only oracle calls of the iteration.
struct InnerWorkspace {
    Vec U;            // g(xhat) - J^T xhat - (1 - tau) V + ytilde / rho
    Vec sampled_grad; // one stochastic gradient at xhat
    Vec g_hat;        // g(xhat)
    Mat J_hat;        // n x m constraint Jacobian at xhat
    Vec xhat;
    Vec ytilde; // ytilde_k
    Vec V;      // V_k
    double rho = 0, L = 0, tau = 1;
};

struct InnerOptions {
    double tol = 1e-12;
    int max_iterations = 50;
};

struct InnerResult {
    Vec x;
    int iterations = 0;
    double residual = 0; // |w_{t+1} - w_t| at exit
    bool converged = false;
};

struct SlackMultiplier {
    Vec s;
    Vec y;
};

struct IterationReport {
    int k = 0; // outer iteration; metrics refer to x_{k+1}
    int inner_iterations = 0;
    double inner_residual = 0;
    bool inner_converged = true;
    double objective = 0;
    double feasibility = 0;
    StepSizes steps;
    double wall_ms = 0;
};

template <ConstrainedProblem P>
SolverState init(const P &p, const Vec &x1, const Vec &y1) {
    const Index n = p.dim(), m = p.num_constraints();
    if (x1.size() != n)
        throw InvalidInput("x1 has wrong dimension");
    if (y1.size() != m)
        throw InvalidInput("y1 has wrong dimension");
    if (!p.domain().contains(x1))
        throw InvalidInput("x1 lies outside the domain");
    SolverState st;
    st.k = 1;
    st.x = x1;
    st.x_prev = x1;
    st.xhat = x1;
    st.s = Vec::Zero(m);
    st.y = y1;
    st.ytilde = y1;
    st.ybar = y1;
    st.V = constraint_residual(p, x1);
    return st;
}

template <ConstrainedProblem P>
InnerWorkspace make_workspace(const P &p, const SolverState &st, const StepSizes &steps,
                              Vec sampled_grad) {
    InnerWorkspace ws;
    ws.sampled_grad = std::move(sampled_grad);
    ws.xhat = st.xhat;
    ws.g_hat = p.constraint_values(st.xhat);
    ws.J_hat = p.constraint_jacobian(st.xhat);
    ws.ytilde = st.ytilde;
    ws.V = st.V;
    ws.rho = steps.rho;
    ws.L = steps.L;
    ws.tau = steps.tau;
    ws.U = ws.g_hat - ws.J_hat.transpose() * st.xhat - (1 - steps.tau) * st.V + st.ytilde / steps.rho;
    return ws;
}

namespace detail {
template <ConstrainedProblem P>
Vec penalty_argument(const Vec &w, const InnerWorkspace &ws, const P &p) {
    return ws.U + ws.J_hat.transpose() * w + p.composite_constraint_values(w);
}
} // namespace detail

/// F(w) = prox(rho [a(w)]_+, sampled_grad + rho J [a(w)]_+, xhat, L) with
/// a(w) = U + J^T w + chi(w).
template <ConstrainedProblem P>
Vec apply_F(const Vec &w, const InnerWorkspace &ws, const P &p) {
    const Vec weights = ws.rho * positive_part(detail::penalty_argument(w, ws, p));
    ProxRequest req{weights, ws.sampled_grad + ws.J_hat * weights, ws.xhat, ws.L};
    return composite_prox(p, req);
}

/// Fixed-point iteration w_{t+1} = F(w_t) from w_0 = xhat. Stops when
/// |w_{t+1} - w_t| <= tol max(1, |w_t|) or after max_iterations applications.
template <ConstrainedProblem P>
InnerResult inner_fixed_point(const InnerWorkspace &ws, const P &p, const InnerOptions &opts = {}) {
    InnerResult r;
    Vec w = ws.xhat;
    while (r.iterations < opts.max_iterations) {
        Vec next = apply_F(w, ws, p);
        ++r.iterations;
        r.residual = (next - w).norm();
        const bool done = r.residual <= opts.tol * std::max(1.0, w.norm());
        w = std::move(next);
        if (done) {
            r.converged = true;
            break;
        }
    }
    r.x = std::move(w);
    return r;
}

/// s_{k+1} = [a]_-, y_{k+1} = rho [a]_+ with a = U + J^T x_next + chi(x_next).
/// Cross-checks y against the extrapolated dual step and throws
/// ConsistencyError on disagreement.
template <ConstrainedProblem P>
SlackMultiplier recover_s_y(const Vec &x_next, const InnerWorkspace &ws, const P &p) {
    const Vec arg = detail::penalty_argument(x_next, ws, p);
    SlackMultiplier out{negative_part(arg), ws.rho * positive_part(arg)};

    const Vec chi = p.composite_constraint_values(x_next);
    const Vec vtilde = ws.g_hat + ws.J_hat.transpose() * (x_next - ws.xhat) + chi - out.s;
    const Vec y_check = ws.ytilde + ws.rho * (vtilde - (1 - ws.tau) * ws.V);
    const double err = (y_check - out.y).norm();
    if (err > 1e-8 * std::max({1.0, out.y.norm(), y_check.norm()}))
        throw ConsistencyError("multiplier closed form disagrees with dual step by " +
                               std::to_string(err));
    return out;
}

/// (1/tau_prev) [x_K - (1 - tau_prev) x_{K-1}]
inline Vec momentum_point(const Vec &x_last, const Vec &x_prev, double tau_prev) {
    if (!(tau_prev > 0 && tau_prev <= 1))
        throw InvalidInput("tau must lie in (0, 1]");
    return (x_last - (1 - tau_prev) * x_prev) / tau_prev;
}

struct StepResult {
    SolverState state;
    IterationReport report;
};

/// One outer iteration: a single stochastic gradient at xhat_k, the inner
/// fixed point for x_{k+1}, closed-form (s, y) and the dual/momentum updates.
template <ConstrainedProblem P>
StepResult step(const SolverState &st, const P &p, const StepSchedule &sched, Rng &rng,
                const InnerOptions &inner = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    const StepSizes ss = sched.at(st.k);

    const InnerWorkspace ws = make_workspace(p, st, ss, p.sample_gradient(st.xhat, rng));
    InnerResult fp = inner_fixed_point(ws, p, inner);
    SlackMultiplier sy = recover_s_y(fp.x, ws, p);

    StepResult out;
    SolverState &nx = out.state;
    nx.k = st.k + 1;
    nx.x_prev = st.x;
    nx.x = std::move(fp.x);
    const Vec chi = p.composite_constraint_values(nx.x);
    const Vec g_next = p.constraint_values(nx.x);
    nx.V = g_next + chi - sy.s;
    const Vec vtilde = ws.g_hat + ws.J_hat.transpose() * (nx.x - ws.xhat) + chi - sy.s;
    nx.ytilde = st.ytilde + ss.eta * (vtilde - (1 - ss.tau) * st.V);
    nx.ybar = (1 - ss.tau) * st.ybar + ss.tau * sy.y;
    nx.xhat = nx.x + ss.beta_next * (nx.x - st.x);
    nx.s = std::move(sy.s);
    nx.y = std::move(sy.y);

    IterationReport &rep = out.report;
    rep.k = st.k;
    rep.inner_iterations = fp.iterations;
    rep.inner_residual = fp.residual;
    rep.inner_converged = fp.converged;
    rep.objective = p.objective_value(nx.x) + p.composite().objective_value(nx.x);
    rep.feasibility = g_next.size() == 0 ? 0.0 : (g_next + chi).cwiseMax(0.0).norm();
    rep.steps = ss;
    rep.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

struct RunOptions {
    std::uint64_t seed = 0;
    InnerOptions inner;
    // Called with the state after every outer iteration.
    std::function<void(const SolverState &)> observer;
};

struct RunResult {
    Vec x_last;       // x_K
    Vec x_prev;       // x_{K-1}
    double tau_prev;  // tau_{K-1}
    SolverState final_state;
    std::vector<IterationReport> trace;
    long oracle_calls = 0;
    int inner_not_converged = 0;

    Vec momentum() const { return momentum_point(x_last, x_prev, tau_prev); }
};

/// K - 1 outer iterations from (x1, y1); returns the last iterate x_K.
template <ConstrainedProblem P>
RunResult run(const P &p, const StepSchedule &sched, const Vec &x1, const Vec &y1,
              const RunOptions &opts = {}) {
    const int K = sched.horizon();
    Rng rng(opts.seed);
    SolverState st = init(p, x1, y1);
    RunResult res;
    res.trace.reserve(std::size_t(K - 1));
    for (int k = 1; k < K; ++k) {
        StepResult sr = step(st, p, sched, rng, opts.inner);
        ++res.oracle_calls;
        if (!sr.report.inner_converged)
            ++res.inner_not_converged;
        res.trace.push_back(sr.report);
        st = std::move(sr.state);
        if (opts.observer)
            opts.observer(st);
    }
    res.x_last = st.x;
    res.x_prev = st.x_prev;
    res.tau_prev = sched.table().tau[K - 1];
    res.final_state = std::move(st);
    return res;
}

} // namespace augconex
