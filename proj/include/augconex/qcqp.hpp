#pragma once

#include <augconex/problem.hpp>
#include <augconex/spectral.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace augconex {

/// How the l1 term enters the method: through the prox, or folded into f and
/// linearized with the rest of the objective.
enum class L1Handling { prox, linearized };

inline const char *to_string(L1Handling v) { return v == L1Handling::prox ? "prox-l1" : "linearized-l1"; }

inline L1Handling parse_l1_handling(const std::string &s) {
    if (s == "prox-l1" || s == "prox")
        return L1Handling::prox;
    if (s == "linearized-l1" || s == "linearized")
        return L1Handling::linearized;
    throw InvalidInput("unknown l1 variant '" + s + "'");
}

/// min 1/2 x'A_0 x + b_0'x + lambda |x|_1
/// s.t. 1/2 x'A_i x + b_i'x - c_i <= 0,  |x| <= radius.
struct QcqpInstance {
    std::vector<Mat> A; // m + 1 symmetric PSD matrices, A[0] is the objective
    std::vector<Vec> b; // m + 1 vectors
    Vec c;              // m offsets in [0, 2]
    double lambda = 0;
    double radius = 10;

    Index dim() const { return A.empty() ? 0 : A.front().rows(); }
    Index num_constraints() const { return c.size(); }
};

struct QcqpSpec {
    int n = 100;
    int m = 10;
    double lambda = 0;
    double radius = 10;
    bool strongly_convex = false;
    double mu = 1; // added to A_0 when strongly convex
    std::uint64_t seed = 0;
};

/// A_i = R_i'R_i / n with standard normal R_i, b_i standard normal, c_i
/// uniform on [0, 2]. Deterministic in the seed.
inline QcqpInstance generate_qcqp(const QcqpSpec &spec) {
    if (spec.n < 1 || spec.m < 0)
        throw InvalidInput("QCQP needs n >= 1 and m >= 0");
    if (!(spec.radius > 0) || spec.lambda < 0)
        throw InvalidInput("QCQP needs radius > 0 and lambda >= 0");
    Rng rng(spec.seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 2.0);
    const Index n = spec.n;

    QcqpInstance q;
    q.lambda = spec.lambda;
    q.radius = spec.radius;
    for (int i = 0; i <= spec.m; ++i) {
        Mat R(n, n);
        for (Index col = 0; col < n; ++col)
            for (Index row = 0; row < n; ++row)
                R(row, col) = normal(rng);
        Mat A = R.transpose() * R / double(n);
        A = 0.5 * (A + A.transpose()).eval();
        if (i == 0 && spec.strongly_convex)
            A.diagonal().array() += spec.mu;
        q.A.push_back(std::move(A));
    }
    for (int i = 0; i <= spec.m; ++i) {
        Vec b(n);
        for (Index j = 0; j < n; ++j)
            b[j] = normal(rng);
        q.b.push_back(std::move(b));
    }
    q.c.resize(spec.m);
    for (int i = 0; i < spec.m; ++i)
        q.c[i] = unif(rng);
    return q;
}

struct ProblemConstants {
    SmoothnessProfile objective;
    ConstraintProfile constraints;
};

/// L_f = |A_0|, L_gi = |A_i|, M_gi = D_x |A_i| + |b_i|, H_gi = M_chi_i = 0.
/// H_f = 2 lambda sqrt(n) when the l1 term is linearized into f.
/// mu_f is the smallest eigenvalue of A_0 when `strongly_convex`, else 0.
inline ProblemConstants derive_constants(const QcqpInstance &q, L1Handling variant,
                                         bool strongly_convex) {
    ProblemConstants pc;
    const auto m = std::size_t(q.num_constraints());
    pc.objective.smooth = spectral_norm_psd(q.A[0]);
    pc.objective.nonsmooth =
        variant == L1Handling::linearized ? 2 * q.lambda * std::sqrt(double(q.dim())) : 0.0;
    pc.objective.strong_convexity = strongly_convex ? std::max(0.0, smallest_eigenvalue_psd(q.A[0])) : 0.0;
    pc.constraints = ConstraintProfile::zeros(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double nrm = spectral_norm_psd(q.A[i + 1]);
        pc.constraints.smooth[i] = nrm;
        pc.constraints.lipschitz[i] = q.radius * nrm + q.b[i + 1].norm();
    }
    return pc;
}

/// QCQP instance wrapped as a ConstrainedProblem with Gaussian gradient noise
/// of standard deviation `sigma` per component.
class QcqpProblem {
  public:
    QcqpProblem(QcqpInstance inst, L1Handling variant, bool strongly_convex, double sigma = 0)
        : inst_(std::move(inst)), variant_(variant) {
        if (sigma < 0)
            throw InvalidInput("noise level must be >= 0");
        constants_ = derive_constants(inst_, variant_, strongly_convex);
        constants_.objective.noise = sigma;
        composite_.l1_weight = variant_ == L1Handling::prox ? inst_.lambda : 0.0;
    }

    Index dim() const { return inst_.dim(); }
    Index num_constraints() const { return inst_.num_constraints(); }

    double objective_value(const Vec &x) const {
        double v = 0.5 * x.dot(inst_.A[0] * x) + inst_.b[0].dot(x);
        if (variant_ == L1Handling::linearized)
            v += inst_.lambda * x.lpNorm<1>();
        return v;
    }

    Vec objective_gradient(const Vec &x) const {
        Vec g = inst_.A[0] * x + inst_.b[0];
        if (variant_ == L1Handling::linearized)
            g += inst_.lambda * x.unaryExpr([](double v) { return double((v > 0) - (v < 0)); });
        return g;
    }

    Vec sample_gradient(const Vec &x, Rng &rng) const {
        Vec g = objective_gradient(x);
        const double sigma = constants_.objective.noise;
        if (sigma == 0)
            return g;
        std::normal_distribution<double> normal;
        for (Index i = 0; i < g.size(); ++i)
            g[i] += sigma * normal(rng);
        return g;
    }

    Vec constraint_values(const Vec &x) const {
        Vec out(num_constraints());
        for (Index i = 0; i < out.size(); ++i)
            out[i] = 0.5 * x.dot(inst_.A[i + 1] * x) + inst_.b[i + 1].dot(x) - inst_.c[i];
        return out;
    }

    Mat constraint_jacobian(const Vec &x) const {
        Mat J(dim(), num_constraints());
        for (Index i = 0; i < J.cols(); ++i)
            J.col(i) = inst_.A[i + 1] * x + inst_.b[i + 1];
        return J;
    }

    Vec composite_constraint_values(const Vec &) const { return Vec::Zero(num_constraints()); }

    const CompositeTerms &composite() const { return composite_; }
    const SmoothnessProfile &smoothness() const { return constants_.objective; }
    const ConstraintProfile &constraint_profile() const { return constants_.constraints; }
    BallDomain domain() const { return {inst_.radius}; }

    const QcqpInstance &instance() const { return inst_; }
    L1Handling variant() const { return variant_; }

  private:
    QcqpInstance inst_;
    L1Handling variant_;
    ProblemConstants constants_;
    CompositeTerms composite_;
};

static_assert(ConstrainedProblem<QcqpProblem>);

/// One draw of the noisy gradient A_0 x + b_0 (+ l1 subgradient) + sigma xi.
inline Vec noisy_gradient(const QcqpProblem &p, const Vec &x, Rng &rng) {
    if (!p.domain().contains(x))
        throw InvalidInput("point lies outside the domain");
    return p.sample_gradient(x, rng);
}

/// Number of components with |x_i| < threshold.
inline int sparsity_level(const Vec &x, double threshold = 1e-10) {
    return int((x.array().abs() < threshold).count());
}

} // namespace augconex
