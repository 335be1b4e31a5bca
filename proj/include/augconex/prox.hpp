#pragma once

#include <augconex/problem.hpp>

namespace augconex {

inline Vec positive_part(const Vec &a) { return a.cwiseMax(0.0); }
inline Vec negative_part(const Vec &a) { return a.cwiseMin(0.0); }

inline Vec project_l2_ball(const Vec &x, double radius) {
    if (!(radius > 0))
        throw InvalidInput("ball radius must be positive");
    return BallDomain{radius}.project(x);
}

/// Componentwise sign(x) max(|x| - lambda, 0).
inline Vec soft_threshold(const Vec &x, double lambda) {
    if (lambda < 0)
        throw InvalidInput("threshold must be nonnegative");
    return x.unaryExpr([lambda](double v) {
        const double mag = std::abs(v) - lambda;
        if (mag <= 0)
            return 0.0;
        return v > 0 ? mag : -mag;
    });
}

/// argmin_{|x| <= radius} lambda |x|_1 + 1/2 |x - center|^2.
///
/// Soft thresholding followed by radial rescaling onto the ball: the KKT
/// multiplier of the ball constraint only scales the thresholded point, so
/// the constrained solution is the unconstrained one shrunk by
/// min(1, radius / |soft_threshold(center, lambda)|). A fully thresholded
/// point stays at the origin.
inline Vec prox_l1_over_ball(const Vec &center, double lambda, double radius) {
    if (!(radius > 0))
        throw InvalidInput("ball radius must be positive");
    Vec u = soft_threshold(center, lambda);
    const double nrm = u.norm();
    if (nrm > radius)
        u *= radius / nrm;
    return u;
}

/// Data of one call to the composite prox:
///   argmin_{x in X} chi_0(x) + w^T chi(x) + <v, x> + curvature/2 |x - center|^2
struct ProxRequest {
    Vec weights; // w >= 0, one per constraint
    Vec linear;  // v
    Vec center;
    double curvature = 1;
};

inline Vec composite_prox(const CompositeTerms &terms, const BallDomain &domain,
                          const ProxRequest &req) {
    if (!terms.constraint_terms_zero)
        throw UnsupportedProblem("composite prox supports chi == 0 only");
    if (!(req.curvature > 0))
        throw InvalidInput("prox curvature must be positive");
    if (terms.l1_weight < 0)
        throw InvalidInput("l1 weight must be nonnegative");
    const Vec target = req.center - req.linear / req.curvature;
    if (terms.l1_weight > 0)
        return prox_l1_over_ball(target, terms.l1_weight / req.curvature, domain.radius);
    return domain.project(target);
}

template <ConstrainedProblem P>
Vec composite_prox(const P &p, const ProxRequest &req) {
    return composite_prox(p.composite(), p.domain(), req);
}

} // namespace augconex
