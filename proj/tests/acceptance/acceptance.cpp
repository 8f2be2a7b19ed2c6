// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 100).
//
//   acceptance [--out DIR] [--only 1,2,...] [--cli PATH]

#include "ccep/harness.hpp"
#include "ccep/tabular.hpp"
#include "../support/td3_reference.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

namespace {

using namespace ccep;
using Clock = std::chrono::steady_clock;

// Frozen tolerances and budgets.
constexpr double grad_check_threshold = 1e-4;
constexpr std::size_t grad_check_nets = 100;
constexpr double grad_check_seconds = 30.0;
constexpr std::size_t ordering_triples = 10'000;
constexpr std::size_t equivalence_updates = 1000;
constexpr std::size_t lemma_trials = 1000;
constexpr double lemma_seconds = 60.0;
constexpr std::size_t controversy_steps = 50'000;
constexpr std::size_t controversy_required = 4;
constexpr std::size_t learning_steps = 100'000;
constexpr double learning_threshold = -300.0;
constexpr std::size_t learning_required = 7;
constexpr std::size_t final_window = 5;
constexpr std::size_t coverage_steps = 50'000;
constexpr std::size_t ablation_steps = 10'000;
constexpr double replay_tolerance = 0.01;
constexpr std::size_t replay_draws = 100'000;

const std::vector<std::uint64_t> controversy_seeds{1, 2, 3, 4, 5};
const std::vector<std::uint64_t> learning_seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
const std::vector<std::uint64_t> coverage_seeds{1, 2, 3, 4, 5};
const std::vector<std::uint64_t> ablation_seeds{1, 2};

// Desk-scale training configuration shared by the learning criteria.
RunConfig desk_config(const fs::path& out) {
    RunConfig c;
    c.agent.hidden_sizes = {64, 64};
    c.agent.batch_size = 64;
    c.agent.warmup_steps = 1000;
    c.agent.buffer_capacity = 1'000'000;
    c.eval_interval = 5000;
    c.eval_episodes = 10;
    c.output_dir = out.string();
    return c;
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string num(double v, int prec = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

std::string sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

Verdict gradient_correctness() {
    const auto t0 = Clock::now();
    const auto rep = grad_check_random_nets(grad_check_nets, 0);
    const double secs = seconds_since(t0);
    return {rep.max_relative_error < grad_check_threshold && secs < grad_check_seconds,
            "nets=" + std::to_string(rep.nets) + " checked=" + std::to_string(rep.checked) +
                " max_rel_err=" + sci(rep.max_relative_error) + " (< " + sci(grad_check_threshold) + ") time=" + num(secs, 2) +
                "s (< " + num(grad_check_seconds, 0) + "s)"};
}

bool bits_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

Verdict styled_ordering() {
    Rng rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0), wide(-3.0, 3.0);
    std::size_t violations = 0;
    for (std::size_t t = 0; t < ordering_triples; ++t) {
        auto c = make_critics(3, 1, {16, 16}, t % 2 == 0, true, rng(), rng());
        for (auto* net : {&c.net1, &c.net2})
            for (auto& l : net->layers) {
                for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = u(rng);
                for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias.data()[i] = u(rng);
            }
        const std::vector<double> s{wide(rng), wide(rng), wide(rng)}, a{wide(rng)};
        const double q0 = styled_q(c, 0, s, a), q1 = styled_q(c, 1, s, a);
        const double hi = styled_q(c, 2, s, a), lo = styled_q(c, 3, s, a);
        const bool ok = lo <= q0 && lo <= q1 && q0 <= hi && q1 <= hi && bits_equal(hi, std::max(q0, q1)) &&
                        bits_equal(lo, std::min(q0, q1));
        violations += !ok;
    }
    return {violations == 0, "triples=" + std::to_string(ordering_triples) + " violations=" + std::to_string(violations)};
}

Verdict td3_equivalence() {
    CcepConfig cfg;
    cfg.hidden_sizes = {64, 64};
    cfg.batch_size = 64;
    cfg.seed = 11;
    cfg.num_styles = 1;
    cfg.opposite_targets = false;
    CcepConfig td3_cfg = cfg;
    td3_cfg.algorithm = Algorithm::td3;
    td3_cfg.opposite_targets.reset();

    Pendulum env;
    const EnvSpec spec = env.spec();
    ReplayBuffer buffer(5000);
    Rng data(5);
    std::uniform_real_distribution<double> torque(-2.0, 2.0);
    auto obs = env.reset(data());
    for (int i = 0; i < 5000; ++i) {
        const std::vector<double> a{torque(data)};
        auto r = env.step(a);
        buffer.push({obs, 0, a, r.reward, r.next_obs, 0, r.terminated()});
        obs = r.done ? env.reset(data()) : r.next_obs;
    }

    Agent ccep(cfg, spec), td3(td3_cfg, spec);
    testing::Td3Reference reference(td3_cfg, spec);
    Rng r1(99), r2(99), r3(99);
    for (std::size_t t = 0; t < equivalence_updates; ++t) {
        ccep.update(buffer, r1);
        td3.update(buffer, r2);
        reference.update(buffer, r3);
    }
    const bool variant = bit_equal(ccep.actor().nets[0], td3.actor().nets[0]) &&
                         bit_equal(ccep.actor().targets[0], td3.actor().targets[0]) &&
                         bit_equal(ccep.critics().net1, td3.critics().net1) &&
                         bit_equal(ccep.critics().net2, td3.critics().net2) &&
                         bit_equal(ccep.critics().target1, td3.critics().target1) &&
                         bit_equal(ccep.critics().target2, td3.critics().target2);
    const bool classic = bit_equal(ccep.actor().nets[0], reference.actor()) &&
                         bit_equal(ccep.actor().targets[0], reference.actor_target()) &&
                         bit_equal(ccep.critics().net1, reference.critic1()) &&
                         bit_equal(ccep.critics().net2, reference.critic2());
    return {variant && classic, "updates=" + std::to_string(equivalence_updates) +
                                    " ccep==td3-variant:" + (variant ? "yes" : "no") +
                                    " ccep==plain-td3:" + (classic ? "yes" : "no")};
}

Verdict lemma_bound() {
    const auto t0 = Clock::now();
    const auto rep = tabular::verify_lemma(lemma_trials, 0);
    const double secs = seconds_since(t0);
    return {rep.passed() && secs < lemma_seconds,
            "trials=" + std::to_string(rep.trials) + " holds=" + std::to_string(rep.holds) + " max_ratio=" +
                num(rep.max_ratio, 4) + " time=" + num(secs, 2) + "s (< " + num(lemma_seconds, 0) + "s)"};
}

Verdict controversy_amplification(const fs::path& out) {
    RunConfig c = desk_config(out / "controversy");
    c.agent.algorithm = Algorithm::td3;
    c.agent.total_steps = controversy_steps;
    c.seeds = controversy_seeds;
    const auto rep = controversy_experiment(c, final_window);
    std::string detail = "opposite>same in " + std::to_string(rep.opposite_greater) + "/" +
                         std::to_string(rep.seeds.size()) + " seeds (need >= " + std::to_string(controversy_required) +
                         ");";
    for (const auto& s : rep.seeds)
        detail += " seed" + std::to_string(s.seed) + " same=" + num(s.same_target, 2) + " opp=" + num(s.opposite_target, 2);
    return {rep.opposite_greater >= controversy_required, detail};
}

Verdict learning(const fs::path& out) {
    BenchPlan plan;
    plan.base = desk_config(out / "learning");
    plan.base.agent.total_steps = learning_steps;
    plan.base.seeds = learning_seeds;
    plan.algorithms = {Algorithm::td3, Algorithm::ccep};
    plan.final_window = final_window;
    const auto rep = bench(plan);
    const BenchCell* td3 = nullptr;
    const BenchCell* ccep = nullptr;
    for (const auto& c : rep.cells) (c.algorithm == Algorithm::td3 ? td3 : ccep) = &c;

    std::size_t reached = 0;
    std::string per_seed;
    for (const auto& s : td3->seeds) {
        if (!s.result) continue;
        const double tail = s.result->tail_return(final_window);
        reached += tail >= learning_threshold;
        per_seed += " " + num(tail, 1);
    }
    const double pooled = std::sqrt((td3->final_return_std * td3->final_return_std +
                                     ccep->final_return_std * ccep->final_return_std) / 2.0);
    const bool matches = ccep->final_return_mean >= td3->final_return_mean - pooled;
    const bool ok = rep.failures.empty() && reached >= learning_required && matches;
    return {ok, "td3 reached " + num(learning_threshold, 0) + " in " + std::to_string(reached) + "/" +
                    std::to_string(td3->seeds.size()) + " seeds (need >= " + std::to_string(learning_required) +
                    "), td3 tails:" + per_seed + "; final td3=" + num(td3->final_return_mean, 1) + "+-" +
                    num(td3->final_return_std, 1) + " ccep=" + num(ccep->final_return_mean, 1) + "+-" +
                    num(ccep->final_return_std, 1) + " pooled_std=" + num(pooled, 1)};
}

Verdict coverage(const fs::path& out) {
    BenchPlan plan;
    plan.base = desk_config(out / "coverage");
    plan.base.env = "pointmaze";
    plan.base.agent.total_steps = coverage_steps;
    plan.base.seeds = coverage_seeds;
    plan.algorithms = {Algorithm::td3, Algorithm::ccep};
    const auto rep = bench(plan);
    const BenchCell* td3 = nullptr;
    const BenchCell* ccep = nullptr;
    for (const auto& c : rep.cells) (c.algorithm == Algorithm::td3 ? td3 : ccep) = &c;

    std::vector<std::size_t> unique(4, 0);
    std::string per_seed;
    for (const auto& s : ccep->seeds) {
        if (!s.result || !s.result->divergence) continue;
        per_seed += " seed" + std::to_string(s.seed) + "=[";
        for (std::size_t j = 0; j < 4; ++j) {
            unique[j] += s.result->divergence->unique_cells[j];
            per_seed += (j ? "," : "") + std::to_string(s.result->divergence->unique_cells[j]);
        }
        per_seed += "]";
    }
    const bool some_unique = std::any_of(unique.begin(), unique.end(), [](std::size_t u) { return u > 0; });
    const bool wider = ccep->final_coverage_mean >= td3->final_coverage_mean;
    return {rep.failures.empty() && wider && some_unique,
            "coverage ccep=" + num(ccep->final_coverage_mean, 4) + " td3=" + num(td3->final_coverage_mean, 4) +
                "; unique cells per style:" + per_seed};
}

Verdict cooperation_ablation(const fs::path& out) {
    std::vector<std::string> tables;
    BenchReport last;
    for (const char* run : {"run_a", "run_b"}) {
        BenchPlan plan;
        plan.base = desk_config(out / "ablation" / run);
        plan.base.agent.total_steps = ablation_steps;
        plan.base.eval_interval = 2000;
        plan.base.seeds = ablation_seeds;
        plan.envs = {"pendulum", "pointmaze"};
        plan.algorithms = {Algorithm::ccep, Algorithm::ccep_separate};
        last = bench(plan);
        std::string all = slurp(last.comparison_path);
        for (const auto& c : last.cells) all += slurp(c.aggregate_path);
        tables.push_back(all);
    }
    const bool identical = !tables[0].empty() && tables[0] == tables[1];
    std::string detail = std::string("comparison table ") + (identical ? "byte-identical" : "DIFFERS") + " across two runs;";
    for (const auto& c : last.cells)
        detail += " " + c.env + "/" + to_string(c.algorithm) + " max_avg=" + num(c.max_average_return, 2);
    return {identical && last.failures.empty(), detail};
}

Verdict determinism(const fs::path& out, const std::string& cli) {
    const fs::path dir = out / "determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path cfg = dir / "desk.json";
    save_config(cfg.string(), desk_config(dir));
    std::vector<std::string> csvs;
    for (const char* sub : {"a", "b"}) {
        const fs::path d = dir / sub;
        const std::string cmd = cli + " train -c " + cfg.string() +
                                " --env pointmaze --steps 4000 --warmup 500 --eval-interval 1000 --seed 7 --out " +
                                d.string() + " > /dev/null";
        if (std::system(cmd.c_str()) != 0) return {false, "train invocation failed: " + cmd};
        csvs.push_back(slurp(d / "pointmaze_ccep_seed7.csv"));
    }
    const bool same = !csvs[0].empty() && csvs[0] == csvs[1];
    return {same, std::string("two `train` invocations -> CSVs ") + (same ? "byte-identical" : "differ") + " (" +
                      std::to_string(csvs[0].size()) + " bytes)"};
}

Verdict replay_uniformity() {
    ReplayBuffer b(4);
    for (int i = 0; i < 4; ++i) b.push({{double(i)}, 0, {0.0}, 0.0, {0.0}, 0, false});
    Rng rng(10);
    std::array<std::size_t, 4> counts{};
    for (auto i : b.sample_indices(replay_draws, rng)) ++counts[i];
    bool ok = true;
    std::string detail = "frequencies:";
    for (auto c : counts) {
        const double f = static_cast<double>(c) / static_cast<double>(replay_draws);
        ok &= std::abs(f - 0.25) <= replay_tolerance;
        detail += " " + num(f, 4);
    }
    return {ok, detail + " (0.25 +- " + num(replay_tolerance, 2) + ")"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::string out = "acceptance_runs";
    std::vector<int> only;
    std::string cli = CCEP_CLI_PATH;
    app.add_option("--out", out, "scratch directory for runs");
    app.add_option("--only", only, "criteria to run")->delimiter(',');
    app.add_option("--cli", cli, "path to the ccep executable");
    CLI11_PARSE(app, argc, argv);

    const fs::path root(out);
    fs::create_directories(root);
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"gradient correctness", gradient_correctness},
        {"styled-critic ordering", styled_ordering},
        {"TD3 equivalence", td3_equivalence},
        {"performance-gap bound", lemma_bound},
        {"controversy amplification", [&] { return controversy_amplification(root); }},
        {"learning at desk scale", [&] { return learning(root); }},
        {"exploration coverage", [&] { return coverage(root); }},
        {"cooperation ablation", [&] { return cooperation_ablation(root); }},
        {"determinism", [&] { return determinism(root, cli); }},
        {"replay uniformity", replay_uniformity},
    };
    const std::set<int> selected(only.begin(), only.end());
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        const auto t0 = Clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        failed += !v.pass;
        std::printf("[%s] %2d %-26s %s  (%.1fs)\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                    v.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    return std::min(failed, 100);
}
