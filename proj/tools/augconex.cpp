#include <augconex/harness.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

namespace ac = augconex;
using nlohmann::json;

namespace {

// Options shared by every subcommand. Each flag is parsed into `flags`; after
// parsing, the config file is applied to the defaults and then every flag the
// user actually passed is copied over it.
struct ConfigOptions {
    ac::ExperimentConfig flags;
    std::string mode = "convex", variant = "prox-l1", config_file;
    bool no_reference = false;
    std::vector<std::pair<CLI::Option *, std::function<void(ac::ExperimentConfig &)>>> bound;

    template <class T>
    void bind(CLI::App &app, const std::string &name, T ac::ExperimentConfig::*field,
              const std::string &help) {
        auto *opt = app.add_option(name, flags.*field, help);
        bound.emplace_back(opt, [this, field](ac::ExperimentConfig &c) { c.*field = flags.*field; });
    }

    void attach(CLI::App &app) {
        app.add_option("--config", config_file, "JSON config file; flags override its values")
            ->check(CLI::ExistingFile);
        bound.emplace_back(app.add_option("--mode", mode, "convex | strongly-convex"),
                           [this](ac::ExperimentConfig &c) { c.mode = ac::parse_mode(mode); });
        bound.emplace_back(app.add_option("--variant", variant, "prox-l1 | linearized-l1"),
                           [this](ac::ExperimentConfig &c) { c.variant = ac::parse_l1_handling(variant); });
        bind(app, "-n,--n", &ac::ExperimentConfig::n, "dimension");
        bind(app, "-m,--m", &ac::ExperimentConfig::m, "number of constraints");
        bind(app, "-K,--K", &ac::ExperimentConfig::K, "horizon (K - 1 outer iterations)");
        bind(app, "--lambda", &ac::ExperimentConfig::lambda, "l1 weight");
        bind(app, "--sigma", &ac::ExperimentConfig::sigma, "gradient noise standard deviation");
        bind(app, "--rho1", &ac::ExperimentConfig::rho1, "initial penalty (convex mode)");
        bind(app, "--B", &ac::ExperimentConfig::B, "multiplier bound B");
        bind(app, "--Dx", &ac::ExperimentConfig::radius, "domain radius D_x");
        bind(app, "--mu", &ac::ExperimentConfig::mu, "strong convexity shift of A_0");
        bind(app, "--dual-norm-bound", &ac::ExperimentConfig::dual_norm_bound, "bound on |y*|");
        bind(app, "--seeds", &ac::ExperimentConfig::seeds, "instance seeds");
        bind(app, "--workers", &ac::ExperimentConfig::workers, "parallel seeds");
        bind(app, "-o,--output", &ac::ExperimentConfig::output_dir,
             "output directory (AUGCONEX_OUTPUT_DIR overrides)");
        auto *tol = app.add_option("--inner-tol", flags.inner.tol, "fixed-point tolerance");
        bound.emplace_back(tol, [this](ac::ExperimentConfig &c) { c.inner.tol = flags.inner.tol; });
        auto *tmax = app.add_option("--inner-max", flags.inner.max_iterations, "fixed-point T_max");
        bound.emplace_back(tmax, [this](ac::ExperimentConfig &c) {
            c.inner.max_iterations = flags.inner.max_iterations;
        });
        bound.emplace_back(app.add_flag("--no-reference", no_reference, "skip reference solutions"),
                           [this](ac::ExperimentConfig &c) { c.with_reference = !no_reference; });
    }

    ac::ExperimentConfig resolve() const {
        ac::ExperimentConfig c;
        if (!config_file.empty()) {
            std::ifstream f(config_file);
            ac::apply_json(c, json::parse(f));
        }
        for (const auto &[opt, apply] : bound)
            if (opt->count() > 0)
                apply(c);
        c.validate();
        return c;
    }
};

void write_json(const std::string &dir, const std::string &name, const json &j) {
    std::cout << j.dump(2) << '\n';
    if (dir.empty())
        return;
    std::filesystem::create_directories(dir);
    std::ofstream(std::filesystem::path(dir) / name, std::ios::binary) << j.dump(2) << '\n';
}

ac::ScheduleParams params_for(const ac::ExperimentConfig &c) {
    const ac::QcqpProblem p(ac::generate_qcqp(c.instance_spec(c.seeds.front())), c.variant,
                            c.mode == ac::Mode::strongly_convex, c.sigma);
    return ac::schedule_params(c, p);
}

json slopes_json(const std::vector<std::pair<double, double>> &pts) {
    try {
        return ac::fit_rate(pts);
    } catch (const ac::InsufficientData &e) {
        return e.what();
    }
}

int cmd_solve(const ac::ExperimentConfig &c, const std::string &instance_file) {
    ac::ExperimentConfig cfg = c;
    if (!instance_file.empty()) {
        std::ifstream f(instance_file);
        const ac::QcqpSpec s = ac::parse_instance_descriptor(json::parse(f));
        cfg.n = s.n;
        cfg.m = s.m;
        cfg.lambda = s.lambda;
        cfg.radius = s.radius;
        cfg.mu = s.mu;
        cfg.mode = s.strongly_convex ? ac::Mode::strongly_convex : ac::Mode::convex;
        cfg.seeds = {s.seed};
    }
    const auto sum = ac::run_experiment(cfg);
    const std::string dir = ac::resolve_output_dir(cfg.output_dir);
    if (!dir.empty()) {
        for (auto seed : cfg.seeds) {
            std::ofstream(std::filesystem::path(dir) / ("instance_seed" + std::to_string(seed) + ".json"))
                << ac::instance_descriptor(cfg.instance_spec(seed)).dump(2) << '\n';
        }
    }
    write_json(dir, "summary.json", ac::to_json(sum));
    return sum.successes().size() == cfg.seeds.size() ? 0 : 1;
}

int cmd_sweep(const ac::ExperimentConfig &c, std::vector<double> lambdas, std::vector<int> Ks) {
    if (lambdas.empty())
        lambdas = {c.lambda};
    if (Ks.empty())
        Ks = {c.K};
    ac::ReferenceCache refs;
    json runs = json::array(), slopes = json::array();
    bool all_ok = true;
    for (double lam : lambdas) {
        std::vector<std::pair<double, double>> opt, feas;
        for (int K : Ks) {
            ac::ExperimentConfig cfg = c;
            cfg.lambda = lam;
            cfg.K = K;
            const auto sum = ac::run_experiment(cfg, &refs);
            all_ok = all_ok && sum.successes().size() == cfg.seeds.size();
            if (!sum.successes().empty()) {
                if (cfg.with_reference)
                    opt.emplace_back(K, std::abs(sum.mean_of(&ac::SeedOutcome::optimality_gap)));
                feas.emplace_back(K, sum.mean_of(&ac::SeedOutcome::feasibility));
            }
            runs.push_back(ac::to_json(sum));
        }
        json s{{"lambda", lam}, {"feasibility_gap_slope", slopes_json(feas)}};
        if (c.with_reference)
            s["optimality_gap_slope"] = slopes_json(opt);
        slopes.push_back(std::move(s));
    }
    write_json(ac::resolve_output_dir(c.output_dir), "sweep_summary.json",
               {{"config", ac::to_json(c)}, {"lambdas", lambdas}, {"K", Ks}, {"slopes", slopes},
                {"runs", runs}});
    return all_ok ? 0 : 1;
}

int cmd_bounds(const ac::ExperimentConfig &c, const std::vector<double> &eps, double dual_distance) {
    ac::ScheduleParams sp = params_for(c);
    json out = json::array();
    for (double e : eps) {
        const auto b = ac::iteration_bound(sp, e, dual_distance);
        out.push_back({{"eps", e},
                       {"K_eps", std::isfinite(b.value) ? json(b.value) : json("inf")},
                       {"terms", b.terms},
                       {"dominant", b.dominant}});
    }
    std::cout << json{{"mode", ac::to_string(c.mode)}, {"dual_distance", dual_distance}, {"bounds", out}}.dump(2)
              << '\n';
    return 0;
}

int cmd_verify(const ac::ExperimentConfig &c) {
    const auto report = ac::verify_conditions(params_for(c));
    json rows = json::array();
    for (const auto &cond : report.conditions)
        rows.push_back({{"name", cond.name},
                        {"checked", cond.passed.size()},
                        {"failures", cond.failures()},
                        {"worst_margin", cond.worst_margin}});
    std::cout << json{{"mode", ac::to_string(c.mode)}, {"K", c.K}, {"all_passed", report.all_passed()},
                      {"conditions", rows}}
                     .dump(2)
              << '\n';
    return report.all_passed() ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Aug-ConEx solver and sparse-QCQP benchmark"};
    app.require_subcommand(1);

    ConfigOptions solve_o, sweep_o, bounds_o, verify_o;
    auto *solve = app.add_subcommand("solve", "run one configuration over its seeds");
    solve_o.attach(*solve);
    std::string instance_file;
    solve->add_option("--instance", instance_file, "instance descriptor JSON")->check(CLI::ExistingFile);

    auto *sweep = app.add_subcommand("sweep", "grid over lambda and K for the configured seeds");
    sweep_o.attach(*sweep);
    std::vector<double> lambdas;
    std::vector<int> Ks;
    sweep->add_option("--lambdas", lambdas, "lambda grid");
    sweep->add_option("--Ks", Ks, "horizon grid");

    auto *bounds = app.add_subcommand("bounds", "iteration bounds K_eps for the first seed's instance");
    bounds_o.attach(*bounds);
    std::vector<double> eps{1e-1, 1e-2, 1e-3};
    double dual_distance = 1;
    bounds->add_option("--eps", eps, "target accuracies");
    bounds->add_option("--dual-distance", dual_distance, "assumed |y_1 - y*|");

    auto *verify = app.add_subcommand("verify", "check step-size conditions for the configured schedule");
    verify_o.attach(*verify);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*solve)
            return cmd_solve(solve_o.resolve(), instance_file);
        if (*sweep)
            return cmd_sweep(sweep_o.resolve(), lambdas, Ks);
        if (*bounds)
            return cmd_bounds(bounds_o.resolve(), eps, dual_distance);
        return cmd_verify(verify_o.resolve());
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
