#pragma once

#include <augconex/qcqp.hpp>
#include <augconex/reference.hpp>
#include <augconex/solver.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

namespace augconex {

struct ExperimentConfig {
    Mode mode = Mode::convex;
    int n = 100;
    int m = 10;
    int K = 9000;
    double lambda = 0;
    double sigma = 10;
    double rho1 = 1;
    double B = 1;
    double radius = 10; // D_x
    double mu = 1;      // added to A_0 in strongly convex mode
    double dual_norm_bound = 0;
    L1Handling variant = L1Handling::prox;
    std::vector<std::uint64_t> seeds{1};
    InnerOptions inner;
    bool with_reference = true;
    int workers = 1;
    std::string output_dir; // empty: no files

    void validate() const {
        if (K < 2)
            throw InvalidInput("K must be >= 2");
        if (n < 1 || m < 0)
            throw InvalidInput("need n >= 1 and m >= 0");
        if (seeds.empty())
            throw InvalidInput("seed list must be nonempty");
        for (double v : {lambda, sigma, rho1, B, radius, mu, dual_norm_bound})
            if (!std::isfinite(v))
                throw InvalidInput("configuration reals must be finite");
        if (inner.max_iterations < 1 || !(inner.tol > 0))
            throw InvalidInput("inner loop needs tol > 0 and T_max >= 1");
        if (workers < 1)
            throw InvalidInput("workers must be >= 1");
    }

    QcqpSpec instance_spec(std::uint64_t seed) const {
        return {n, m, lambda, radius, mode == Mode::strongly_convex, mu, seed};
    }
};

// --- JSON (config files, instance descriptors, summaries) -------------------

inline nlohmann::json to_json(const ExperimentConfig &c) {
    return {{"mode", to_string(c.mode)},
            {"n", c.n},
            {"m", c.m},
            {"K", c.K},
            {"lambda", c.lambda},
            {"sigma", c.sigma},
            {"rho1", c.rho1},
            {"B", c.B},
            {"D_x", c.radius},
            {"mu", c.mu},
            {"dual_norm_bound", c.dual_norm_bound},
            {"variant", to_string(c.variant)},
            {"seeds", c.seeds},
            {"inner_tol", c.inner.tol},
            {"inner_max", c.inner.max_iterations},
            {"reference", c.with_reference},
            {"workers", c.workers},
            {"output", c.output_dir}};
}

/// Overlays the keys present in `j` onto `c`.
inline void apply_json(ExperimentConfig &c, const nlohmann::json &j) {
    if (j.contains("mode"))
        c.mode = parse_mode(j["mode"].get<std::string>());
    if (j.contains("variant"))
        c.variant = parse_l1_handling(j["variant"].get<std::string>());
    auto get = [&](const char *key, auto &field) {
        if (j.contains(key))
            field = j[key].get<std::remove_reference_t<decltype(field)>>();
    };
    get("n", c.n);
    get("m", c.m);
    get("K", c.K);
    get("lambda", c.lambda);
    get("sigma", c.sigma);
    get("rho1", c.rho1);
    get("B", c.B);
    get("D_x", c.radius);
    get("mu", c.mu);
    get("dual_norm_bound", c.dual_norm_bound);
    get("seeds", c.seeds);
    get("inner_tol", c.inner.tol);
    get("inner_max", c.inner.max_iterations);
    get("reference", c.with_reference);
    get("workers", c.workers);
    get("output", c.output_dir);
}

/// Instances are stored by their generating parameters; matrices are
/// regenerated from the seed.
inline nlohmann::json instance_descriptor(const QcqpSpec &s) {
    return {{"format", "augconex-qcqp-instance"},
            {"version", 1},
            {"n", s.n},
            {"m", s.m},
            {"seed", s.seed},
            {"lambda", s.lambda},
            {"D_x", s.radius},
            {"mode", s.strongly_convex ? "strongly-convex" : "convex"},
            {"mu", s.mu}};
}

inline QcqpSpec parse_instance_descriptor(const nlohmann::json &j) {
    if (j.value("format", "") != "augconex-qcqp-instance")
        throw InvalidInput("not an instance descriptor");
    QcqpSpec s;
    s.n = j.at("n").get<int>();
    s.m = j.at("m").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.lambda = j.at("lambda").get<double>();
    s.radius = j.at("D_x").get<double>();
    s.strongly_convex = parse_mode(j.at("mode").get<std::string>()) == Mode::strongly_convex;
    s.mu = j.value("mu", 1.0);
    return s;
}

// --- traces ------------------------------------------------------------------

struct TraceRow {
    int k = 0;
    double psi0 = 0;
    double feas_gap = 0;
    int inner_iters = 0;
    double tau = 0, rho = 0, eta = 0, L = 0;
    double wall_ms = 0;

    friend bool operator==(const TraceRow &, const TraceRow &) = default;
};

inline constexpr const char *trace_header = "k,psi0,feas_gap,inner_iters,tau,rho,eta,L,wall_ms";

inline std::vector<TraceRow> to_rows(const std::vector<IterationReport> &trace) {
    std::vector<TraceRow> rows;
    rows.reserve(trace.size());
    for (const auto &r : trace)
        rows.push_back({r.k, r.objective, r.feasibility, r.inner_iterations, r.steps.tau,
                        r.steps.rho, r.steps.eta, r.steps.L, r.wall_ms});
    return rows;
}

namespace detail {
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
} // namespace detail

/// CSV with LF line endings and '.' decimals; doubles printed round-trip exact.
inline void write_trace_csv(std::ostream &os, const std::vector<TraceRow> &rows) {
    os << trace_header << '\n';
    for (const auto &r : rows) {
        os << r.k << ',' << detail::fmt_double(r.psi0) << ',' << detail::fmt_double(r.feas_gap)
           << ',' << r.inner_iters << ',' << detail::fmt_double(r.tau) << ','
           << detail::fmt_double(r.rho) << ',' << detail::fmt_double(r.eta) << ','
           << detail::fmt_double(r.L) << ',' << detail::fmt_double(r.wall_ms) << '\n';
    }
}

inline std::vector<TraceRow> parse_trace_csv(std::istream &is) {
    std::string line;
    if (!std::getline(is, line) || line != trace_header)
        throw InvalidInput("trace CSV header mismatch");
    std::vector<TraceRow> rows;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');)
            f.push_back(cell);
        if (f.size() != 9)
            throw InvalidInput("trace CSV row has " + std::to_string(f.size()) + " fields");
        TraceRow r;
        r.k = std::stoi(f[0]);
        r.psi0 = std::strtod(f[1].c_str(), nullptr);
        r.feas_gap = std::strtod(f[2].c_str(), nullptr);
        r.inner_iters = std::stoi(f[3]);
        r.tau = std::strtod(f[4].c_str(), nullptr);
        r.rho = std::strtod(f[5].c_str(), nullptr);
        r.eta = std::strtod(f[6].c_str(), nullptr);
        r.L = std::strtod(f[7].c_str(), nullptr);
        r.wall_ms = std::strtod(f[8].c_str(), nullptr);
        rows.push_back(r);
    }
    return rows;
}

// --- statistics ----------------------------------------------------------------

/// Least-squares slope of log(gap) against log(K). Points with a
/// nonpositive or non-finite gap are dropped.
inline double fit_rate(const std::vector<std::pair<double, double>> &points) {
    std::vector<std::pair<double, double>> logs;
    for (auto [K, gap] : points)
        if (gap > 0 && std::isfinite(gap) && K > 0)
            logs.emplace_back(std::log(K), std::log(gap));
    if (logs.size() < 3)
        throw InsufficientData("rate fit needs >= 3 positive points, have " +
                               std::to_string(logs.size()));
    double mx = 0, my = 0;
    for (auto [x, y] : logs) {
        mx += x;
        my += y;
    }
    mx /= double(logs.size());
    my /= double(logs.size());
    double sxy = 0, sxx = 0;
    for (auto [x, y] : logs) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if (sxx == 0)
        throw InsufficientData("rate fit needs distinct K values");
    return sxy / sxx;
}

inline std::map<int, long> histogram(const std::vector<int> &values) {
    std::map<int, long> h;
    for (int v : values)
        ++h[v];
    return h;
}

// --- references ----------------------------------------------------------------

/// Thread-safe memo of reference solutions keyed by instance parameters and mode.
class ReferenceCache {
  public:
    ReferenceSolution get(const QcqpSpec &spec, int horizon) {
        const Key key{spec.seed, spec.n, spec.m, spec.lambda, spec.radius, spec.strongly_convex, spec.mu};
        {
            std::lock_guard lock(mu_);
            if (auto it = cache_.find(key); it != cache_.end())
                return it->second;
        }
        ReferenceSolution ref = reference_solution(generate_qcqp(spec), horizon, spec.strongly_convex);
        std::lock_guard lock(mu_);
        return cache_.emplace(key, std::move(ref)).first->second;
    }

  private:
    using Key = std::tuple<std::uint64_t, int, int, double, double, bool, double>;
    std::mutex mu_;
    std::map<Key, ReferenceSolution> cache_;
};

// --- experiments -----------------------------------------------------------------

struct SeedOutcome {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::vector<TraceRow> rows;
    Vec x_last;
    double psi0 = 0;
    double feasibility = 0;
    int sparsity = 0;
    bool has_reference = false;
    double reference_value = 0;
    double optimality_gap = 0;       // signed
    double momentum_distance_sq = 0; // |momentum point - x_ref|^2
    long oracle_calls = 0;
    int inner_not_converged = 0;
    bool invariants_ok = true; // y >= 0 and s <= 0 after every step
    std::string trace_path;
};

struct ExperimentSummary {
    ExperimentConfig config;
    std::vector<SeedOutcome> seeds;
    std::vector<double> mean_psi0, mean_feas, mean_opt_gap; // per row
    std::map<int, long> inner_histogram;

    std::vector<const SeedOutcome *> successes() const {
        std::vector<const SeedOutcome *> out;
        for (const auto &s : seeds)
            if (s.ok)
                out.push_back(&s);
        return out;
    }
    double mean_of(double SeedOutcome::*field) const {
        const auto ok = successes();
        double acc = 0;
        for (const auto *s : ok)
            acc += s->*field;
        return ok.empty() ? std::nan("") : acc / double(ok.size());
    }
    double mean_sparsity() const {
        const auto ok = successes();
        double acc = 0;
        for (const auto *s : ok)
            acc += s->sparsity;
        return ok.empty() ? std::nan("") : acc / double(ok.size());
    }
};

/// Output directory with the environment override applied.
inline std::string resolve_output_dir(const std::string &configured) {
    if (const char *env = std::getenv("AUGCONEX_OUTPUT_DIR"); env && *env)
        return env;
    return configured;
}

inline std::string trace_file_name(const ExperimentConfig &c, std::uint64_t seed) {
    std::ostringstream os;
    os << "trace_" << (c.mode == Mode::convex ? "convex" : "strong") << "_n" << c.n << "_m" << c.m
       << "_K" << c.K << "_lam" << c.lambda << "_sig" << c.sigma << "_" << to_string(c.variant)
       << "_seed" << seed << ".csv";
    return os.str();
}

inline ScheduleParams schedule_params(const ExperimentConfig &c, const QcqpProblem &p) {
    ScheduleParams sp;
    sp.mode = c.mode;
    sp.horizon = c.K;
    sp.rho1 = c.rho1;
    sp.B = c.B;
    sp.dual_norm_bound = c.dual_norm_bound;
    sp.constraints = aggregate_constants(p.constraint_profile());
    sp.objective = p.smoothness();
    sp.radius = c.radius;
    return sp;
}

// Noise stream seed, decorrelated from the instance seed.
inline std::uint64_t noise_seed(std::uint64_t seed) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline SeedOutcome run_seed(const ExperimentConfig &c, std::uint64_t seed, ReferenceCache *refs,
                            const std::string &out_dir) {
    SeedOutcome out;
    out.seed = seed;
    try {
        const QcqpSpec spec = c.instance_spec(seed);
        const QcqpProblem p(generate_qcqp(spec), c.variant, c.mode == Mode::strongly_convex, c.sigma);
        const StepSchedule sched(schedule_params(c, p));
        RunOptions opts;
        opts.seed = noise_seed(seed);
        opts.inner = c.inner;
        opts.observer = [&out](const SolverState &st) {
            if ((st.y.array() < 0).any() || (st.s.array() > 0).any())
                out.invariants_ok = false;
        };
        const RunResult rr = run(p, sched, Vec::Zero(c.n), Vec::Zero(c.m), opts);
        out.rows = to_rows(rr.trace);
        out.x_last = rr.x_last;
        out.psi0 = eval_objective(p, rr.x_last);
        out.feasibility = feasibility_gap(p, rr.x_last);
        out.sparsity = sparsity_level(rr.x_last);
        out.oracle_calls = rr.oracle_calls;
        out.inner_not_converged = rr.inner_not_converged;
        if (c.with_reference) {
            ReferenceCache local;
            const ReferenceSolution ref = (refs ? *refs : local).get(spec, c.K);
            out.has_reference = true;
            out.reference_value = ref.value;
            out.optimality_gap = out.psi0 - ref.value;
            out.momentum_distance_sq = (rr.momentum() - ref.x).squaredNorm();
        }
        if (!out_dir.empty()) {
            std::filesystem::create_directories(out_dir);
            out.trace_path = (std::filesystem::path(out_dir) / trace_file_name(c, seed)).string();
            std::ofstream f(out.trace_path, std::ios::binary);
            write_trace_csv(f, out.rows);
        }
        out.ok = true;
    } catch (const std::exception &e) {
        out.ok = false;
        out.error = e.what();
    }
    return out;
}

/// Runs every seed of `c` (in parallel up to `c.workers`), writes one trace
/// CSV per seed when an output directory is set, and aggregates seed means
/// and the inner-iteration histogram. Per-seed failures are recorded, not
/// rethrown.
inline ExperimentSummary run_experiment(const ExperimentConfig &c, ReferenceCache *refs = nullptr) {
    c.validate();
    ExperimentSummary sum;
    sum.config = c;
    sum.seeds.resize(c.seeds.size());
    const std::string out_dir = resolve_output_dir(c.output_dir);
    ReferenceCache local_refs;
    ReferenceCache *cache = refs ? refs : &local_refs;

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < c.seeds.size();)
            sum.seeds[i] = run_seed(c, c.seeds[i], cache, out_dir);
    };
    const int nthreads = std::min<int>(c.workers, int(c.seeds.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto &t : pool)
        t.join();

    const auto ok = sum.successes();
    const std::size_t rows = std::size_t(c.K - 1);
    if (!ok.empty()) {
        sum.mean_psi0.assign(rows, 0.0);
        sum.mean_feas.assign(rows, 0.0);
        const bool gaps = std::all_of(ok.begin(), ok.end(), [](auto *s) { return s->has_reference; });
        if (gaps)
            sum.mean_opt_gap.assign(rows, 0.0);
        for (const auto *s : ok) {
            for (std::size_t r = 0; r < rows; ++r) {
                sum.mean_psi0[r] += s->rows[r].psi0 / double(ok.size());
                sum.mean_feas[r] += s->rows[r].feas_gap / double(ok.size());
                if (gaps)
                    sum.mean_opt_gap[r] += (s->rows[r].psi0 - s->reference_value) / double(ok.size());
            }
            for (const auto &row : s->rows)
                ++sum.inner_histogram[row.inner_iters];
        }
    }
    return sum;
}

inline nlohmann::json to_json(const ExperimentSummary &s) {
    nlohmann::json seeds = nlohmann::json::array();
    for (const auto &o : s.seeds) {
        nlohmann::json j{{"seed", o.seed}, {"ok", o.ok}};
        if (!o.ok) {
            j["error"] = o.error;
        } else {
            j["psi0"] = o.psi0;
            j["feasibility_gap"] = o.feasibility;
            j["sparsity"] = o.sparsity;
            j["oracle_calls"] = o.oracle_calls;
            j["inner_not_converged"] = o.inner_not_converged;
            j["invariants_ok"] = o.invariants_ok;
            if (o.has_reference) {
                j["reference_value"] = o.reference_value;
                j["optimality_gap"] = o.optimality_gap;
                j["momentum_distance_sq"] = o.momentum_distance_sq;
            }
            if (!o.trace_path.empty())
                j["trace"] = o.trace_path;
        }
        seeds.push_back(std::move(j));
    }
    nlohmann::json hist = nlohmann::json::object();
    for (auto [k, v] : s.inner_histogram)
        hist[std::to_string(k)] = v;
    nlohmann::json out{{"config", to_json(s.config)}, {"seeds", seeds}, {"inner_histogram", hist}};
    if (!s.successes().empty()) {
        out["mean"] = {{"psi0", s.mean_of(&SeedOutcome::psi0)},
                       {"feasibility_gap", s.mean_of(&SeedOutcome::feasibility)},
                       {"sparsity", s.mean_sparsity()}};
        if (s.seeds.front().has_reference || !s.mean_opt_gap.empty())
            out["mean"]["optimality_gap"] = s.mean_of(&SeedOutcome::optimality_gap);
    }
    return out;
}

} // namespace augconex
