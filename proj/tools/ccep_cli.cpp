// Command-line front end: train, bench, plot, verify-lemma, grad-check,
// controversy-exp.

#include "ccep/harness.hpp"
#include "ccep/numerics.hpp"
#include "ccep/tabular.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::size_t> steps;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> algo;
    std::optional<std::string> env;
    std::optional<std::string> out;
    std::optional<std::size_t> warmup;
    std::optional<std::size_t> eval_interval;
    std::vector<std::uint64_t> seeds;

    void attach(CLI::App* app, bool with_seed_list) {
        app->add_option("-c,--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
        app->add_option("--steps", steps, "total environment steps");
        app->add_option("--seed", seed, "run seed");
        app->add_option("--algo", algo, "ccep | ccep-separate | td3 | ddpg");
        app->add_option("--env", env, "pendulum | pointmaze");
        app->add_option("--out", out, "output directory");
        app->add_option("--warmup", warmup, "uniform-random warmup steps");
        app->add_option("--eval-interval", eval_interval, "steps between evaluations");
        if (with_seed_list) app->add_option("--seeds", seeds, "seed list")->delimiter(',');
    }

    ccep::RunConfig resolve() const {
        ccep::RunConfig c = config_path.empty() ? ccep::RunConfig{} : ccep::load_config(config_path);
        if (steps) c.agent.total_steps = *steps;
        if (seed) c.agent.seed = *seed;
        if (algo) c.agent.algorithm = ccep::parse_algorithm(*algo);
        if (env) c.env = *env;
        if (out) c.output_dir = *out;
        if (warmup) c.agent.warmup_steps = *warmup;
        if (eval_interval) c.eval_interval = *eval_interval;
        if (!seeds.empty()) c.seeds = seeds;
        c.validate();
        return c;
    }
};

std::string fmt(double v, int prec = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

int cmd_train(const Overrides& o) {
    const auto cfg = o.resolve();
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = ccep::run(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "csv: " << r.csv_path.string() << "\n"
              << "steps: " << r.train.env_steps << "  updates: " << r.train.updates << "  episodes: " << r.train.episodes
              << "\n"
              << "max average return: " << fmt(r.max_average_return) << "\n"
              << "final coverage: " << fmt(r.final_coverage, 4) << "\n";
    if (r.divergence) {
        std::cout << "unique cells per style:";
        for (auto u : r.divergence->unique_cells) std::cout << ' ' << u;
        std::cout << "\n";
    }
    std::cout << "wall time: " << fmt(secs, 1) << " s\n";
    return 0;
}

int cmd_bench(const Overrides& o, const std::vector<std::string>& algos, const std::vector<std::string>& envs,
              std::size_t jobs) {
    ccep::BenchPlan plan;
    plan.base = o.resolve();
    plan.envs = envs;
    for (const auto& a : algos) plan.algorithms.push_back(ccep::parse_algorithm(a));
    plan.jobs = jobs;
    const auto rep = ccep::bench(plan);
    std::cout << "env        algorithm      seeds  max_avg_return        final_return          final_coverage\n";
    for (const auto& c : rep.cells) {
        char line[256];
        std::snprintf(line, sizeof line, "%-10s %-14s %5zu  %9.2f +- %-8.2f  %9.2f +- %-8.2f  %.4f +- %.4f\n", c.env.c_str(),
                      ccep::to_string(c.algorithm).c_str(), c.completed(), c.max_average_return, c.max_average_return_std,
                      c.final_return_mean, c.final_return_std, c.final_coverage_mean, c.final_coverage_std);
        std::cout << line;
    }
    std::cout << "comparison: " << rep.comparison_path.string() << "\n";
    for (const auto& f : rep.failures) std::cerr << "failed: " << f << "\n";
    return rep.failures.empty() ? 0 : 1;
}

int cmd_controversy(const Overrides& o, std::size_t window) {
    auto cfg = o.resolve();
    const auto rep = ccep::controversy_experiment(cfg, window);
    std::cout << "seed  same_target   opposite_target\n";
    for (const auto& r : rep.seeds)
        std::cout << r.seed << "     " << fmt(r.same_target, 4) << "        " << fmt(r.opposite_target, 4) << "\n";
    std::cout << "opposite > same in " << rep.opposite_greater << "/" << rep.seeds.size() << " seeds\n"
              << "csv: " << rep.csv_path.string() << "\n";
    return 0;
}

int cmd_verify_lemma(std::size_t trials, std::uint64_t seed, std::size_t max_states, std::size_t max_actions) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = ccep::tabular::verify_lemma(trials, seed, max_states, max_actions);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "trials: " << rep.trials << "\n"
              << "holds: " << rep.holds << "\n"
              << "max lhs/rhs ratio: " << fmt(rep.max_ratio, 6) << "\n"
              << "wall time: " << fmt(secs, 2) << " s\n"
              << (rep.passed() ? "PASS" : "FAIL") << "\n";
    return rep.passed() ? 0 : 1;
}

int cmd_grad_check(std::size_t nets, std::uint64_t seed, double threshold) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = ccep::grad_check_random_nets(nets, seed);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = rep.max_relative_error < threshold;
    char err[64];
    std::snprintf(err, sizeof err, "%.3e", rep.max_relative_error);
    std::cout << "nets: " << rep.nets << "\n"
              << "parameters checked: " << rep.checked << " (skipped at kink: " << rep.skipped_at_kink << ")\n"
              << "max relative error: " << err << "\n"
              << "wall time: " << fmt(secs, 2) << " s\n"
              << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-style critic exploration lab"};
    app.require_subcommand(1);

    Overrides train_o, bench_o, contro_o;
    auto* train = app.add_subcommand("train", "train one seed and write its evaluation CSV");
    train_o.attach(train, false);

    auto* bench = app.add_subcommand("bench", "run several seeds (and algorithms/envs) and aggregate");
    bench_o.attach(bench, true);
    std::vector<std::string> bench_algos, bench_envs;
    std::size_t jobs = 1;
    bench->add_option("--algos", bench_algos, "algorithms to compare")->delimiter(',');
    bench->add_option("--envs", bench_envs, "environments to run")->delimiter(',');
    bench->add_option("--jobs", jobs, "parallel runs");

    auto* plot = app.add_subcommand("plot", "emit an SVG learning-curve chart from CSVs");
    std::vector<std::string> plot_inputs;
    std::string plot_out = "curves.svg";
    ccep::PlotOptions plot_opt;
    plot->add_option("csv", plot_inputs, "input CSV files")->required()->check(CLI::ExistingFile);
    plot->add_option("-o,--output", plot_out, "output SVG path");
    plot->add_option("--smooth", plot_opt.smooth_window, "moving-average window (1 = off)");
    plot->add_option("--title", plot_opt.title, "chart title");

    auto* lemma = app.add_subcommand("verify-lemma", "check the performance-gap bound on random tabular MDPs");
    std::size_t trials = 1000, max_states = 10, max_actions = 4;
    std::uint64_t lemma_seed = 0;
    lemma->add_option("--trials", trials);
    lemma->add_option("--seed", lemma_seed);
    lemma->add_option("--max-states", max_states);
    lemma->add_option("--max-actions", max_actions);

    auto* grad = app.add_subcommand("grad-check", "compare backprop with central finite differences");
    std::size_t nets = 100;
    std::uint64_t grad_seed = 0;
    double grad_threshold = 1e-4;
    grad->add_option("--nets", nets);
    grad->add_option("--seed", grad_seed);
    grad->add_option("--threshold", grad_threshold);

    auto* contro = app.add_subcommand("controversy-exp", "compare critic disagreement with same vs opposite targets");
    contro_o.attach(contro, true);
    std::size_t window = 5;
    contro->add_option("--window", window, "final evaluations averaged");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) return cmd_train(train_o);
        if (*bench) return cmd_bench(bench_o, bench_algos, bench_envs, jobs);
        if (*plot) {
            ccep::plot(plot_inputs, plot_out, plot_opt);
            std::cout << "chart: " << plot_out << "\n";
            return 0;
        }
        if (*lemma) return cmd_verify_lemma(trials, lemma_seed, max_states, max_actions);
        if (*grad) return cmd_grad_check(nets, grad_seed, grad_threshold);
        if (*contro) {
            if (!contro_o.algo) contro_o.algo = "td3";
            return cmd_controversy(contro_o, window);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
