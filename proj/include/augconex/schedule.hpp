#pragma once

#include <augconex/problem.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace augconex {

enum class Mode { convex, strongly_convex };

inline const char *to_string(Mode m) {
    return m == Mode::convex ? "convex" : "strongly-convex";
}

inline Mode parse_mode(const std::string &s) {
    if (s == "convex")
        return Mode::convex;
    if (s == "strongly-convex" || s == "strongly_convex")
        return Mode::strongly_convex;
    throw InvalidInput("unknown mode '" + s + "'");
}

struct ScheduleParams {
    Mode mode = Mode::convex;
    int horizon = 2;            // K
    double rho1 = 1;            // convex mode; strongly convex derives its own
    double B = 1;               // >= 1
    double dual_norm_bound = 0; // stands in for |y*|
    // Strongly convex: rho_1 = mu_f / (divisor (M_g + M_chi)^2).
    double strong_rho_divisor = 2;
    AggregateConstants constraints;
    SmoothnessProfile objective;
    double radius = 1; // D_x

    void validate() const {
        if (horizon < 2)
            throw InvalidInput("horizon K must be >= 2");
        if (!(B >= 1))
            throw InvalidInput("B must be >= 1");
        if (!(radius > 0))
            throw InvalidInput("domain radius must be positive");
        if (!(dual_norm_bound >= 0))
            throw InvalidInput("dual norm bound must be >= 0");
        objective.validate();
        if (mode == Mode::convex && !(rho1 > 0))
            throw InvalidInput("rho_1 must be positive");
        if (mode == Mode::strongly_convex) {
            if (!(objective.strong_convexity > 0))
                throw InvalidInput("strongly convex schedule needs mu_f > 0");
            if (!(strong_rho_divisor > 0))
                throw InvalidInput("rho_1 divisor must be positive");
        }
    }
};

/// H_* = L_g D_x [|y*| + 1 - B]_+ + H_g (|y*| + 1) with |y*| replaced by the
/// supplied bound.
inline double h_star(const ScheduleParams &p) {
    const double y = p.dual_norm_bound;
    return p.constraints.smooth * p.radius * std::max(y + 1 - p.B, 0.0) +
           p.constraints.nonsmooth * (y + 1);
}

/// The rho_1 actually used by the schedule.
inline double effective_rho1(const ScheduleParams &p) {
    if (p.mode == Mode::convex)
        return p.rho1;
    const double c = p.constraints.coupling();
    // Without constraint coupling rho never reaches L; any positive value works.
    if (c == 0)
        return p.objective.strong_convexity / p.strong_rho_divisor;
    return p.objective.strong_convexity / (p.strong_rho_divisor * c * c);
}

struct StepSizes {
    double tau = 1;
    double rho = 0;
    double eta = 0;
    double L = 0;
    double beta_next = 0; // beta_{k+1}
};

/// Schedule values for k = 1..K, stored 1-based (index 0 unused).
struct ScheduleTable {
    ScheduleParams params;
    std::vector<double> tau, rho, eta, L;

    int horizon() const { return params.horizon; }
};

namespace detail {

inline ScheduleTable convex_table(const ScheduleParams &p) {
    const int K = p.horizon;
    ScheduleTable t{p, std::vector<double>(K + 1), std::vector<double>(K + 1),
                    std::vector<double>(K + 1), std::vector<double>(K + 1)};
    const double c = p.constraints.coupling();
    const double hs = h_star(p);
    const double Hf = p.objective.nonsmooth, sigma = p.objective.noise;
    const double noise_root = std::sqrt(120.0 * K * (hs * hs + 2 * (Hf * Hf + sigma * sigma)));
    const double L = 2 * (p.objective.smooth + p.B * p.constraints.smooth + p.rho1 * K * c * c) +
                     K * noise_root / (120.0 * p.radius);
    for (int k = 1; k <= K; ++k) {
        t.tau[k] = 2.0 / (k + 1);
        // rho_1 is given; rho_{k+1} = rho_1 (k + 2) afterwards.
        t.rho[k] = k == 1 ? p.rho1 : p.rho1 * (k + 1);
        t.eta[k] = p.rho1 * double(k) * double(k) / K;
        t.L[k] = L;
    }
    return t;
}

inline ScheduleTable strongly_convex_table(const ScheduleParams &p) {
    const int K = p.horizon;
    ScheduleTable t{p, std::vector<double>(K + 1), std::vector<double>(K + 1),
                    std::vector<double>(K + 1), std::vector<double>(K + 1)};
    const double c = p.constraints.coupling();
    const double rho1 = effective_rho1(p);
    const double base = p.objective.smooth + p.B * p.constraints.smooth;
    double tau = 1;
    for (int k = 1; k <= K; ++k) {
        if (k > 1)
            tau = 0.5 * tau * (std::sqrt(tau * tau + 4) - tau);
        t.tau[k] = tau;
        t.rho[k] = rho1 / (tau * tau);
        t.eta[k] = t.rho[k];
        t.L[k] = 2 * (base + t.rho[k] * c * c);
    }
    return t;
}

} // namespace detail

inline ScheduleTable build_schedule_table(const ScheduleParams &p) {
    p.validate();
    return p.mode == Mode::convex ? detail::convex_table(p) : detail::strongly_convex_table(p);
}

/// beta_{k+1} for 1 <= k < K.
inline double extrapolation_weight(const ScheduleTable &t, int k) {
    const double tk = t.tau[k], tn = t.tau[k + 1];
    if (t.params.mode == Mode::convex)
        return (1 - tk) * tn / tk;
    return (1 - tk) * tk * t.L[k] / (tk * tk * t.L[k] + t.L[k + 1] * tn);
}

/// Precomputed step-size policy; immutable after construction.
class StepSchedule {
  public:
    explicit StepSchedule(const ScheduleParams &params) : table_(build_schedule_table(params)) {}
    explicit StepSchedule(ScheduleTable table) : table_(std::move(table)) {}

    /// Values used by outer iteration k, 1 <= k < K.
    StepSizes at(int k) const {
        if (k < 1 || k >= horizon())
            throw InvalidInput("schedule index " + std::to_string(k) + " outside [1, K)");
        return {table_.tau[k], table_.rho[k], table_.eta[k], table_.L[k],
                extrapolation_weight(table_, k)};
    }

    int horizon() const { return table_.horizon(); }
    Mode mode() const { return table_.params.mode; }
    const ScheduleParams &params() const { return table_.params; }
    const ScheduleTable &table() const { return table_; }

  private:
    ScheduleTable table_;
};

inline StepSizes convex_schedule(const ScheduleParams &p, int k) {
    if (p.mode != Mode::convex)
        throw InvalidInput("convex_schedule called with a strongly convex policy");
    return StepSchedule(p).at(k);
}

inline StepSizes strongly_convex_schedule(const ScheduleParams &p, int k) {
    if (p.mode != Mode::strongly_convex)
        throw InvalidInput("strongly_convex_schedule called with a convex policy");
    return StepSchedule(p).at(k);
}

// --- side conditions -------------------------------------------------------

/// Outcome of one named condition checked for k = 2..K-1.
struct ConditionResult {
    std::string name;
    std::vector<char> passed; // passed[k - 2]
    double worst_margin = std::numeric_limits<double>::infinity();

    int failures() const { return int(std::count(passed.begin(), passed.end(), char(0))); }
    bool ok() const { return failures() == 0; }
};

struct ConditionReport {
    std::vector<ConditionResult> conditions;

    bool all_passed() const {
        return std::all_of(conditions.begin(), conditions.end(),
                           [](const ConditionResult &c) { return c.ok(); });
    }
    const ConditionResult *find(const std::string &name) const {
        for (const auto &c : conditions)
            if (c.name == name)
                return &c;
        return nullptr;
    }
};

namespace detail {

constexpr double condition_rel_tol = 1e-10;

// Margin of lhs <= rhs relative to the magnitude of both sides.
inline double le_margin(double lhs, double rhs) {
    const double scale = std::max({std::abs(lhs), std::abs(rhs), std::numeric_limits<double>::min()});
    return (rhs - lhs) / scale;
}

class ConditionSink {
  public:
    explicit ConditionSink(int K) : K_(K) {}

    void le(const std::string &name, int k, double lhs, double rhs) {
        record(name, k, le_margin(lhs, rhs), le_margin(lhs, rhs) >= -condition_rel_tol);
    }
    void lt(const std::string &name, int k, double lhs, double rhs) {
        record(name, k, le_margin(lhs, rhs), lhs < rhs);
    }
    void eq(const std::string &name, int k, double lhs, double rhs) {
        const double m = -std::abs(le_margin(lhs, rhs));
        record(name, k, m, m >= -condition_rel_tol);
    }

    ConditionReport finish() { return std::move(report_); }

  private:
    void record(const std::string &name, int k, double margin, bool ok) {
        ConditionResult *r = nullptr;
        for (auto &c : report_.conditions)
            if (c.name == name)
                r = &c;
        if (!r) {
            report_.conditions.push_back({name, std::vector<char>(std::max(K_ - 2, 0), 1), margin});
            r = &report_.conditions.back();
        }
        r->passed[k - 2] = ok;
        r->worst_margin = std::min(r->worst_margin, margin);
    }

    int K_;
    ConditionReport report_;
};

} // namespace detail

/// Checks the step-size side conditions of the policy for k = 2..K-1.
///
/// Convex: eta_k/2 <= rho_k, L_k >= 2(L_f + B L_g + rho_k (M_g+M_chi)^2),
/// 1/eta_k <= (1-tau_k)/eta_{k-1}.
/// Strongly convex: the two accelerated-sequence inequalities
///   L_{k-1}(1-tau_k)tau_{k-1}^2 + mu(1-tau_k)tau_k >= (L_k - mu) tau_k^2
///   L_{k-1}(tau_{k-1}^2 + m_k tau_k) m_k tau_k >= (L_k - mu) tau_{k-1}^2,
/// with m_k = L_k / L_{k-1}, plus eta_k < 2 rho_k, 1/eta_k = (1-tau_k)/eta_{k-1},
/// the tau recurrence and bounds, and L_k >= mu.
/// Both policies also check the contraction premise L_k >= 2 rho_k (M_g+M_chi)^2.
inline ConditionReport verify_conditions(const ScheduleTable &t) {
    const auto &p = t.params;
    const int K = t.horizon();
    const double c2 = p.constraints.coupling() * p.constraints.coupling();
    const double base = p.objective.smooth + p.B * p.constraints.smooth;
    const double mu = p.objective.strong_convexity;
    detail::ConditionSink sink(K);
    for (int k = 2; k <= K - 1; ++k) {
        const double tau = t.tau[k], tau_prev = t.tau[k - 1];
        const double rho = t.rho[k], eta = t.eta[k], eta_prev = t.eta[k - 1];
        const double L = t.L[k], L_prev = t.L[k - 1];
        sink.le("contraction", k, 2 * rho * c2, L);
        if (p.mode == Mode::convex) {
            sink.le("eta_half_le_rho", k, eta / 2, rho);
            sink.le("L_dominates", k, 2 * (base + rho * c2), L);
            sink.le("dual_step_telescoping", k, 1 / eta, (1 - tau) / eta_prev);
        } else {
            const double mk = L / L_prev;
            sink.le("accel_sequence_a", k, (L - mu) * tau * tau,
                    L_prev * (1 - tau) * tau_prev * tau_prev + mu * (1 - tau) * tau);
            sink.le("accel_sequence_b", k, (L - mu) * tau_prev * tau_prev,
                    L_prev * (tau_prev * tau_prev + mk * tau) * mk * tau);
            sink.lt("eta_lt_2rho", k, eta, 2 * rho);
            sink.eq("dual_step_identity", k, 1 / eta, (1 - tau) / eta_prev);
            sink.eq("tau_recurrence", k, tau * tau, (1 - tau) * tau_prev * tau_prev);
            sink.eq("rho_recurrence", k, t.rho[k - 1], (1 - tau) * rho);
            sink.le("tau_lower", k, 1.0 / (k + 1), tau);
            sink.le("tau_upper", k, tau, 2.0 / (k + 1));
            sink.le("L_ge_mu", k, mu, L);
        }
    }
    return sink.finish();
}

inline ConditionReport verify_conditions(const ScheduleParams &p) {
    return verify_conditions(build_schedule_table(p));
}

// --- iteration bounds ------------------------------------------------------

struct IterationBound {
    double value = 0;          // max of terms, rounded up; may be +inf
    std::vector<double> terms; // individual terms of the max
    std::size_t dominant = 0;  // index of the largest term
};

/// Iterations sufficient for an (eps, eps)-optimal last iterate.
/// `dual_distance` stands in for |y_1 - y_hat| (convex) or |y_1 - y*|
/// (strongly convex), neither of which is observable.
inline IterationBound iteration_bound(const ScheduleParams &p, double eps, double dual_distance) {
    p.validate();
    if (!(eps > 0))
        throw InvalidInput("eps must be positive");
    const double D = p.radius;
    const double hs = h_star(p);
    const double Hf2 = p.objective.nonsmooth * p.objective.nonsmooth;
    const double s2 = p.objective.noise * p.objective.noise;
    const double noise = hs * hs + 2 * (Hf2 + s2);
    const double smooth = p.objective.smooth + p.B * p.constraints.smooth;
    const double c2 = p.constraints.coupling() * p.constraints.coupling();
    const double d2 = dual_distance * dual_distance;
    const double inf = std::numeric_limits<double>::infinity();

    IterationBound out;
    if (p.mode == Mode::convex) {
        const double r1 = p.rho1;
        out.terms.push_back(130 * 130 * D * D * noise / (0.3 * eps * eps) +
                            400 * 400 * D * D * noise / (120 * eps * eps) + 1);
        out.terms.push_back(10 / (eps * r1) * d2 + 520 * D * D * r1 * c2 / eps + 2);
        const double cube_arg = Hf2 + s2 == 0 ? 0.0 : (c2 == 0 ? inf : 5 * (Hf2 + s2) / (eps * r1 * c2));
        out.terms.push_back(std::cbrt(cube_arg) + 1);
        out.terms.push_back(std::sqrt(260 * D * D * smooth / eps) + 1);
        out.terms.push_back(std::cbrt(3000 * D * D * (hs * hs + 8 * (Hf2 + s2)) / (eps * eps)));
    } else {
        const double mu = p.objective.strong_convexity;
        const double eta1 = effective_rho1(p);
        out.terms.push_back(8 * D * std::sqrt(smooth) / std::sqrt(eps) +
                            2 * std::sqrt(2.0) * dual_distance / std::sqrt(eta1 * eps) +
                            4 * std::sqrt(2 * noise) / std::sqrt(mu * eps));
        out.terms.push_back(16 * noise / (mu * eps));
    }
    const auto it = std::max_element(out.terms.begin(), out.terms.end());
    out.dominant = std::size_t(it - out.terms.begin());
    out.value = std::ceil(*it);
    return out;
}

} // namespace augconex
