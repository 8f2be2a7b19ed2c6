#pragma once

// Experiment orchestration: JSON run configuration, single runs with
// periodic evaluation written to CSV, multi-seed benchmarks with
// aggregation, the same- vs opposite-target controversy experiment and an
// SVG learning-curve emitter.

#include "ccep/agent.hpp"
#include "ccep/envs.hpp"
#include "ccep/metrics.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccep {

namespace fs = std::filesystem;

inline constexpr int csv_schema_version = 1;
inline constexpr const char* output_root_env = "CCEP_OUTPUT_ROOT";

struct RunConfig {
    std::string env = "pendulum";
    CcepConfig agent;
    std::size_t eval_interval = 5000;
    std::size_t eval_episodes = 10;
    EvalMode eval_mode = EvalMode::mixture;
    std::size_t grid_resolution = 20;
    std::string output_dir = "runs";
    std::vector<std::uint64_t> seeds;  // bench seeds; empty means {agent.seed}
    MazeLayout maze = MazeLayout::s_corridor();
    bool save_snapshots = false;

    bool operator==(const RunConfig&) const = default;

    std::vector<std::uint64_t> seed_list() const { return seeds.empty() ? std::vector<std::uint64_t>{agent.seed} : seeds; }

    void validate() const {
        agent.validate();
        if (env != "pendulum" && env != "pointmaze")
            throw std::invalid_argument("config: env must be pendulum or pointmaze, got '" + env + "'");
        if (eval_interval == 0) throw std::invalid_argument("config: eval_interval must be > 0");
        if (eval_episodes == 0) throw std::invalid_argument("config: eval_episodes must be > 0");
        if (grid_resolution == 0) throw std::invalid_argument("config: grid_resolution must be > 0");
        maze.validate();
    }
};

// ---------------------------------------------------------------------------
// Config serialization

using Json = nlohmann::json;

inline Json to_json(const RunConfig& c) {
    const auto& a = c.agent;
    Json walls = Json::array();
    for (const auto& w : c.maze.walls) walls.push_back({w.x0, w.y0, w.x1, w.y1});
    Json j = {
        {"env", c.env},
        {"algorithm", to_string(a.algorithm)},
        {"lr_actor", a.lr_actor},
        {"lr_critic", a.lr_critic},
        {"batch_size", a.batch_size},
        {"gamma", a.gamma},
        {"tau", a.tau},
        {"policy_delay", a.policy_delay},
        {"target_noise", a.target_noise},
        {"noise_clip", a.noise_clip},
        {"exploration_noise", a.exploration_noise},
        {"warmup_steps", a.warmup_steps},
        {"buffer_capacity", a.buffer_capacity},
        {"num_styles", a.num_styles},
        {"total_steps", a.total_steps},
        {"seed", a.seed},
        {"hidden_sizes", a.hidden_sizes},
        {"opposite_targets", a.opposite_targets ? Json(*a.opposite_targets) : Json(nullptr)},
        {"eval_interval", c.eval_interval},
        {"eval_episodes", c.eval_episodes},
        {"eval_mode", to_string(c.eval_mode)},
        {"grid_resolution", c.grid_resolution},
        {"output_dir", c.output_dir},
        {"seeds", c.seeds},
        {"maze_start", c.maze.start},
        {"maze_goal", c.maze.goal},
        {"maze_goal_radius", c.maze.goal_radius},
        {"maze_walls", walls},
        {"save_snapshots", c.save_snapshots},
    };
    return j;
}

// Unset keys keep their defaults; unknown keys are rejected.
inline RunConfig config_from_json(const Json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
    RunConfig c;
    auto& a = c.agent;
    using Setter = std::function<void(const Json&)>;
    auto count = [](std::size_t& dst) {
        return Setter([&dst](const Json& v) {
            if (!v.is_number_integer() || v.get<long long>() < 0) throw std::invalid_argument("expected a non-negative integer");
            dst = v.get<std::size_t>();
        });
    };
    auto real = [](double& dst) {
        return Setter([&dst](const Json& v) {
            if (!v.is_number()) throw std::invalid_argument("expected a number");
            dst = v.get<double>();
        });
    };
    const std::map<std::string, Setter> setters = {
        {"env", [&](const Json& v) { c.env = v.get<std::string>(); }},
        {"algorithm", [&](const Json& v) { a.algorithm = parse_algorithm(v.get<std::string>()); }},
        {"lr_actor", real(a.lr_actor)},
        {"lr_critic", real(a.lr_critic)},
        {"batch_size", count(a.batch_size)},
        {"gamma", real(a.gamma)},
        {"tau", real(a.tau)},
        {"policy_delay", count(a.policy_delay)},
        {"target_noise", real(a.target_noise)},
        {"noise_clip", real(a.noise_clip)},
        {"exploration_noise", real(a.exploration_noise)},
        {"warmup_steps", count(a.warmup_steps)},
        {"buffer_capacity", count(a.buffer_capacity)},
        {"num_styles", count(a.num_styles)},
        {"total_steps", count(a.total_steps)},
        {"seed", [&](const Json& v) { a.seed = v.get<std::uint64_t>(); }},
        {"hidden_sizes", [&](const Json& v) { a.hidden_sizes = v.get<std::vector<std::size_t>>(); }},
        {"opposite_targets",
         [&](const Json& v) {
             if (v.is_null()) a.opposite_targets.reset();
             else a.opposite_targets = v.get<bool>();
         }},
        {"eval_interval", count(c.eval_interval)},
        {"eval_episodes", count(c.eval_episodes)},
        {"eval_mode", [&](const Json& v) { c.eval_mode = parse_eval_mode(v.get<std::string>()); }},
        {"grid_resolution", count(c.grid_resolution)},
        {"output_dir", [&](const Json& v) { c.output_dir = v.get<std::string>(); }},
        {"seeds", [&](const Json& v) { c.seeds = v.get<std::vector<std::uint64_t>>(); }},
        {"maze_start", [&](const Json& v) { c.maze.start = v.get<std::array<double, 2>>(); }},
        {"maze_goal", [&](const Json& v) { c.maze.goal = v.get<std::array<double, 2>>(); }},
        {"maze_goal_radius", real(c.maze.goal_radius)},
        {"maze_walls",
         [&](const Json& v) {
             c.maze.walls.clear();
             for (const auto& w : v) {
                 const auto q = w.get<std::array<double, 4>>();
                 c.maze.walls.push_back({q[0], q[1], q[2], q[3]});
             }
         }},
        {"save_snapshots", [&](const Json& v) { c.save_snapshots = v.get<bool>(); }},
    };
    for (const auto& [key, value] : j.items()) {
        auto it = setters.find(key);
        if (it == setters.end()) throw std::invalid_argument("config: unknown key '" + key + "'");
        try {
            it->second(value);
        } catch (const std::exception& e) {
            throw std::invalid_argument("config: invalid value for '" + key + "': " + e.what());
        }
    }
    c.validate();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file '" + path + "'");
    Json j;
    try {
        is >> j;
    } catch (const Json::parse_error& e) {
        throw std::invalid_argument("config '" + path + "': malformed JSON: " + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("config '" + path + "': " + e.what());
    }
}

inline void save_config(const std::string& path, const RunConfig& c) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write config file '" + path + "'");
    os << to_json(c).dump(2) << '\n';
}

// Relative output directories are placed under $CCEP_OUTPUT_ROOT when set.
inline fs::path resolve_output_dir(const std::string& dir) {
    fs::path p(dir);
    if (p.is_relative()) {
        if (const char* root = std::getenv(output_root_env); root && *root) return fs::path(root) / p;
    }
    return p;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

struct EvalRow {
    std::size_t step = 0;
    double return_mean = 0.0;
    double return_std = 0.0;
    std::vector<double> style_returns;
    double controversy = 0.0;
    double coverage = 0.0;
};

inline std::string csv_header(std::size_t num_styles) {
    std::string h = "step,return_mean,return_std";
    for (std::size_t j = 0; j < num_styles; ++j) h += ",style" + std::to_string(j) + "_return";
    return h + ",controversy,coverage";
}

inline std::string csv_line(const EvalRow& r) {
    std::string s = std::to_string(r.step) + "," + format_number(r.return_mean) + "," + format_number(r.return_std);
    for (double v : r.style_returns) s += "," + format_number(v);
    return s + "," + format_number(r.controversy) + "," + format_number(r.coverage);
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw std::invalid_argument("CSV has no column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_number(const std::string& s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw std::invalid_argument("bad number '" + s + "'");
    return v;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open CSV '" + path + "'");
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("CSV '" + path + "' is empty");
    t.header = split_csv_line(line);
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != t.header.size())
            throw std::invalid_argument("CSV '" + path + "' line " + std::to_string(lineno) + ": wrong column count");
        std::vector<double> row;
        for (const auto& c : cells) {
            try {
                row.push_back(parse_number(c));
            } catch (const std::exception&) {
                throw std::invalid_argument("CSV '" + path + "' line " + std::to_string(lineno) + ": bad number '" + c + "'");
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Single run

struct RunResult {
    std::vector<EvalRow> rows;
    double max_average_return = 0.0;  // best return_mean over evaluations
    TrainResult train;
    std::vector<CoverageGrid> style_grids;  // post-warmup visits per style
    std::optional<DivergenceReport> divergence;
    double final_coverage = 0.0;
    fs::path csv_path;

    // Mean of return_mean over the last `n` evaluations.
    double tail_return(std::size_t n) const { return tail_mean(n, [](const EvalRow& r) { return r.return_mean; }); }
    double tail_controversy(std::size_t n) const { return tail_mean(n, [](const EvalRow& r) { return r.controversy; }); }

private:
    template <typename F>
    double tail_mean(std::size_t n, F&& f) const {
        if (rows.empty()) return std::nan("");
        const std::size_t k = std::min(n, rows.size());
        double s = 0.0;
        for (std::size_t i = rows.size() - k; i < rows.size(); ++i) s += f(rows[i]);
        return s / static_cast<double>(k);
    }
};

inline std::string run_file_stem(const RunConfig& c) {
    return c.env + "_" + to_string(c.agent.algorithm) + "_seed" + std::to_string(c.agent.seed);
}

// Trains one seed (agent.seed), evaluating at step 0 and every eval_interval
// steps, and writes one CSV into the output directory.
inline RunResult run(const RunConfig& config, const std::optional<fs::path>& csv_override = std::nullopt) {
    config.validate();
    auto env = make_env(config.env, config.maze);
    auto eval_env = env->clone();
    const std::size_t k = config.agent.styles();
    const std::uint64_t seed = config.agent.seed;

    RunResult result;
    CoverageGrid grid(env->coverage_box(), config.grid_resolution);
    result.style_grids.assign(k, CoverageGrid(env->coverage_box(), config.grid_resolution));
    Rng metrics_rng(derive_seed(seed, stream::metrics));

    const fs::path out_dir = resolve_output_dir(config.output_dir);
    result.csv_path = csv_override ? *csv_override : out_dir / (run_file_stem(config) + ".csv");

    TrainHooks hooks;
    hooks.checkpoint_interval = config.eval_interval;
    hooks.on_visit = [&](const std::array<double, 2>& p, int skill) {
        grid.record_visit(p);
        if (skill >= 0) result.style_grids[static_cast<std::size_t>(skill)].record_visit(p);
    };
    hooks.on_checkpoint = [&](std::size_t step, const Agent& agent, const ReplayBuffer& buffer) {
        const std::uint64_t eval_seed = derive_seed(derive_seed(seed, stream::eval), step);
        const EvalReport main = evaluate(agent, *eval_env, config.eval_episodes, config.eval_mode, eval_seed);
        EvalRow row;
        row.step = step;
        row.return_mean = main.mean;
        row.return_std = main.std;
        if (config.eval_mode == EvalMode::per_style || k == 1) {
            row.style_returns = main.style_returns;
        } else {
            row.style_returns =
                evaluate(agent, *eval_env, config.eval_episodes, EvalMode::per_style, eval_seed).style_returns;
        }
        row.controversy = buffer.empty() ? 0.0 : agent.controversy(buffer.sample(config.agent.batch_size, metrics_rng));
        row.coverage = grid.coverage();
        result.rows.push_back(std::move(row));
        if (config.save_snapshots)
            agent.save_snapshot(out_dir / (run_file_stem(config) + "_snapshots") / ("step_" + std::to_string(step)));
    };

    result.train = train(config.agent, *env, hooks);
    result.final_coverage = grid.coverage();
    if (k >= 2) result.divergence = style_divergence(result.style_grids);
    result.max_average_return = -HUGE_VAL;
    for (const auto& r : result.rows) result.max_average_return = std::max(result.max_average_return, r.return_mean);

    if (!result.csv_path.parent_path().empty()) fs::create_directories(result.csv_path.parent_path());
    std::ofstream os(result.csv_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write CSV '" + result.csv_path.string() + "'");
    os << csv_header(k) << '\n';
    for (const auto& r : result.rows) os << csv_line(r) << '\n';
    if (!os) throw std::runtime_error("write failed for CSV '" + result.csv_path.string() + "'");
    return result;
}

// ---------------------------------------------------------------------------
// Multi-seed benchmark

struct AggregateRow {
    std::size_t step = 0;
    double return_mean = 0.0, return_std = 0.0;
    double controversy_mean = 0.0, controversy_std = 0.0;
    double coverage_mean = 0.0, coverage_std = 0.0;
};

struct SeedOutcome {
    std::uint64_t seed = 0;
    std::optional<RunResult> result;
    std::string error;
};

struct BenchCell {
    std::string env;
    Algorithm algorithm = Algorithm::ccep;
    std::vector<SeedOutcome> seeds;  // ascending by seed
    std::vector<AggregateRow> aggregate;
    double max_average_return = 0.0;
    double max_average_return_std = 0.0;
    double final_return_mean = 0.0, final_return_std = 0.0;
    double final_coverage_mean = 0.0, final_coverage_std = 0.0;
    fs::path aggregate_path;

    std::size_t completed() const {
        return static_cast<std::size_t>(std::count_if(seeds.begin(), seeds.end(), [](const SeedOutcome& s) { return s.result.has_value(); }));
    }
};

struct BenchReport {
    std::vector<BenchCell> cells;
    fs::path comparison_path;
    std::vector<std::string> failures;
};

// Population mean and standard deviation, summed in the given order.
inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
    if (xs.empty()) return {std::nan(""), std::nan("")};
    double s = 0.0;
    for (double x : xs) s += x;
    const double m = s / static_cast<double>(xs.size());
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

// Aggregates completed runs (ascending seed order) per evaluation step.
inline std::vector<AggregateRow> aggregate_runs(const std::vector<const RunResult*>& runs) {
    std::vector<AggregateRow> out;
    if (runs.empty()) return out;
    std::size_t n_rows = runs.front()->rows.size();
    for (auto* r : runs) n_rows = std::min(n_rows, r->rows.size());
    for (std::size_t i = 0; i < n_rows; ++i) {
        std::vector<double> ret, con, cov;
        for (auto* r : runs) {
            ret.push_back(r->rows[i].return_mean);
            con.push_back(r->rows[i].controversy);
            cov.push_back(r->rows[i].coverage);
        }
        AggregateRow a;
        a.step = runs.front()->rows[i].step;
        std::tie(a.return_mean, a.return_std) = mean_std(ret);
        std::tie(a.controversy_mean, a.controversy_std) = mean_std(con);
        std::tie(a.coverage_mean, a.coverage_std) = mean_std(cov);
        out.push_back(a);
    }
    return out;
}

inline void write_aggregate_csv(const fs::path& path, const std::vector<AggregateRow>& rows, std::size_t n_seeds) {
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write CSV '" + path.string() + "'");
    os << "step,return_mean,return_std,controversy_mean,controversy_std,coverage_mean,coverage_std,seeds\n";
    for (const auto& r : rows)
        os << r.step << ',' << format_number(r.return_mean) << ',' << format_number(r.return_std) << ','
           << format_number(r.controversy_mean) << ',' << format_number(r.controversy_std) << ','
           << format_number(r.coverage_mean) << ',' << format_number(r.coverage_std) << ',' << n_seeds << '\n';
}

struct BenchPlan {
    RunConfig base;
    std::vector<std::string> envs;        // empty: {base.env}
    std::vector<Algorithm> algorithms;    // empty: {base.agent.algorithm}
    std::size_t jobs = 1;
    std::size_t final_window = 5;  // evaluations averaged for "final" statistics
};

inline BenchReport bench(const BenchPlan& plan) {
    const auto envs = plan.envs.empty() ? std::vector<std::string>{plan.base.env} : plan.envs;
    const auto algos = plan.algorithms.empty() ? std::vector<Algorithm>{plan.base.agent.algorithm} : plan.algorithms;
    auto seeds = plan.base.seed_list();
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    if (seeds.empty()) throw std::invalid_argument("bench: need at least one seed");
    const fs::path out_dir = resolve_output_dir(plan.base.output_dir);

    struct Job {
        std::size_t cell, slot;
        RunConfig cfg;
    };
    BenchReport report;
    std::vector<Job> jobs;
    for (const auto& e : envs) {
        for (auto a : algos) {
            BenchCell cell;
            cell.env = e;
            cell.algorithm = a;
            for (auto s : seeds) {
                RunConfig cfg = plan.base;
                cfg.env = e;
                cfg.agent.algorithm = a;
                cfg.agent.seed = s;
                cfg.seeds.clear();
                jobs.push_back({report.cells.size(), cell.seeds.size(), cfg});
                cell.seeds.push_back({s, std::nullopt, {}});
            }
            report.cells.push_back(std::move(cell));
        }
    }

    auto execute = [&](const Job& job) {
        auto& slot = report.cells[job.cell].seeds[job.slot];
        try {
            slot.result = run(job.cfg);
        } catch (const std::exception& ex) {
            slot.error = ex.what();
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, plan.jobs);
    if (workers == 1) {
        for (const auto& j : jobs) execute(j);
    } else {
        for (std::size_t start = 0; start < jobs.size(); start += workers) {
            std::vector<std::future<void>> futures;
            for (std::size_t i = start; i < std::min(jobs.size(), start + workers); ++i)
                futures.push_back(std::async(std::launch::async, execute, std::cref(jobs[i])));
            for (auto& f : futures) f.get();
        }
    }

    for (auto& cell : report.cells) {
        std::vector<const RunResult*> done;
        for (const auto& s : cell.seeds) {
            if (s.result) done.push_back(&*s.result);
            else
                report.failures.push_back(cell.env + "/" + to_string(cell.algorithm) + " seed " + std::to_string(s.seed) +
                                          ": " + s.error);
        }
        cell.aggregate = aggregate_runs(done);
        cell.aggregate_path = out_dir / (cell.env + "_" + to_string(cell.algorithm) + "_aggregate.csv");
        write_aggregate_csv(cell.aggregate_path, cell.aggregate, done.size());
        cell.max_average_return = std::nan("");
        cell.max_average_return_std = std::nan("");
        for (const auto& r : cell.aggregate) {
            if (std::isnan(cell.max_average_return) || r.return_mean > cell.max_average_return) {
                cell.max_average_return = r.return_mean;
                cell.max_average_return_std = r.return_std;
            }
        }
        std::vector<double> fin, cov;
        for (auto* r : done) {
            fin.push_back(r->tail_return(plan.final_window));
            cov.push_back(r->final_coverage);
        }
        std::tie(cell.final_return_mean, cell.final_return_std) = mean_std(fin);
        std::tie(cell.final_coverage_mean, cell.final_coverage_std) = mean_std(cov);
    }

    report.comparison_path = out_dir / "comparison.csv";
    fs::create_directories(out_dir);
    std::ofstream os(report.comparison_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + report.comparison_path.string() + "'");
    os << "env,algorithm,seeds_completed,max_average_return,max_average_return_std,final_return_mean,"
          "final_return_std,final_coverage_mean,final_coverage_std\n";
    for (const auto& c : report.cells)
        os << c.env << ',' << to_string(c.algorithm) << ',' << c.completed() << ',' << format_number(c.max_average_return)
           << ',' << format_number(c.max_average_return_std) << ',' << format_number(c.final_return_mean) << ','
           << format_number(c.final_return_std) << ',' << format_number(c.final_coverage_mean) << ','
           << format_number(c.final_coverage_std) << '\n';
    return report;
}

// ---------------------------------------------------------------------------
// Same- vs opposite-target controversy experiment

struct ControversySeed {
    std::uint64_t seed = 0;
    double same_target = 0.0;
    double opposite_target = 0.0;
};

struct ControversyReport {
    std::vector<ControversySeed> seeds;
    std::size_t opposite_greater = 0;
    fs::path csv_path;
};

// End-of-run controversy is the mean over the final `window` evaluations.
inline ControversyReport controversy_experiment(const RunConfig& base, std::size_t window = 5) {
    auto seeds = base.seed_list();
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    const fs::path out_dir = resolve_output_dir(base.output_dir);
    ControversyReport rep;
    for (auto s : seeds) {
        ControversySeed row{s, 0.0, 0.0};
        for (bool opposite : {false, true}) {
            RunConfig cfg = base;
            cfg.agent.seed = s;
            cfg.agent.opposite_targets = opposite;
            cfg.seeds.clear();
            const fs::path csv = out_dir / (opposite ? "opposite" : "same") / (run_file_stem(cfg) + ".csv");
            const RunResult r = run(cfg, csv);
            (opposite ? row.opposite_target : row.same_target) = r.tail_controversy(window);
        }
        rep.opposite_greater += row.opposite_target > row.same_target;
        rep.seeds.push_back(row);
    }
    rep.csv_path = out_dir / "controversy_exp.csv";
    fs::create_directories(out_dir);
    std::ofstream os(rep.csv_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + rep.csv_path.string() + "'");
    os << "seed,same_target,opposite_target,opposite_greater\n";
    for (const auto& r : rep.seeds)
        os << r.seed << ',' << format_number(r.same_target) << ',' << format_number(r.opposite_target) << ','
           << (r.opposite_target > r.same_target ? 1 : 0) << '\n';
    return rep;
}

// ---------------------------------------------------------------------------
// SVG learning curves

struct PlotOptions {
    std::size_t smooth_window = 1;  // trailing moving average; 1 = raw
    std::string title = "Evaluation return";
    std::string x_column = "step";
    std::string mean_column = "return_mean";
    std::string std_column = "return_std";
};

inline std::vector<double> moving_average(const std::vector<double>& xs, std::size_t window) {
    if (window <= 1) return xs;
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
        double s = 0.0;
        for (std::size_t k = lo; k <= i; ++k) s += xs[k];
        out[i] = s / static_cast<double>(i - lo + 1);
    }
    return out;
}

inline std::string svg_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string svg_escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '&': o += "&amp;"; break;
            case '"': o += "&quot;"; break;
            default: o += c;
        }
    }
    return o;
}

// Mean line plus shaded +-std band per input CSV; legend labels are file stems.
inline void plot(const std::vector<std::string>& csv_paths, const std::string& out_path, const PlotOptions& opt = {}) {
    if (csv_paths.empty()) throw std::invalid_argument("plot: no input CSVs");
    struct Series {
        std::string label;
        std::vector<double> x, mean, lo, hi;
    };
    std::vector<Series> series;
    std::vector<std::string> header;
    for (const auto& p : csv_paths) {
        const CsvTable t = read_csv(p);
        if (header.empty()) header = t.header;
        else if (t.header != header) throw std::invalid_argument("plot: CSV schema mismatch in '" + p + "'");
        const auto cx = t.column(opt.x_column), cm = t.column(opt.mean_column), cs = t.column(opt.std_column);
        Series s;
        s.label = fs::path(p).stem().string();
        std::vector<double> m, sd;
        for (const auto& r : t.rows) {
            s.x.push_back(r[cx]);
            m.push_back(r[cm]);
            sd.push_back(r[cs]);
        }
        m = moving_average(m, opt.smooth_window);
        sd = moving_average(sd, opt.smooth_window);
        for (std::size_t i = 0; i < m.size(); ++i) {
            s.mean.push_back(m[i]);
            s.lo.push_back(m[i] - sd[i]);
            s.hi.push_back(m[i] + sd[i]);
        }
        series.push_back(std::move(s));
    }

    double xmin = HUGE_VAL, xmax = -HUGE_VAL, ymin = HUGE_VAL, ymax = -HUGE_VAL;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.lo[i]) || !std::isfinite(s.hi[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.lo[i]);
            ymax = std::max(ymax, s.hi[i]);
        }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
    if (ymax == ymin) ymin -= 0.5, ymax += 0.5;

    constexpr double width = 800, height = 500, left = 80, right = 20, top = 40, bottom = 60;
    const double pw = width - left - right, ph = height - top - bottom;
    auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return top + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
        << svg_escape(opt.title) << "</text>\n";
    svg << "<g stroke=\"#333\" stroke-width=\"1\">\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph << "\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\"/>\n";
    svg << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 5.0, yv = ymin + (ymax - ymin) * i / 5.0;
        svg << "<text x=\"" << svg_number(sx(xv)) << "\" y=\"" << svg_number(top + ph + 18)
            << "\" text-anchor=\"middle\">" << svg_number(xv) << "</text>\n";
        svg << "<text x=\"" << svg_number(left - 6) << "\" y=\"" << svg_number(sy(yv) + 4) << "\" text-anchor=\"end\">"
            << svg_number(yv) << "</text>\n";
    }
    svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">"
        << svg_escape(opt.x_column) << "</text>\n";
    svg << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << top + ph / 2
        << ")\">" << svg_escape(opt.mean_column) << "</text>\n</g>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = palette[k % (sizeof palette / sizeof *palette)];
        std::string band, line;
        for (std::size_t i = 0; i < s.x.size(); ++i) band += svg_number(sx(s.x[i])) + "," + svg_number(sy(s.hi[i])) + " ";
        for (std::size_t i = s.x.size(); i-- > 0;) band += svg_number(sx(s.x[i])) + "," + svg_number(sy(s.lo[i])) + " ";
        for (std::size_t i = 0; i < s.x.size(); ++i) line += svg_number(sx(s.x[i])) + "," + svg_number(sy(s.mean[i])) + " ";
        svg << "<g class=\"series\" data-label=\"" << svg_escape(s.label) << "\">\n";
        svg << "<polygon points=\"" << band << "\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
        svg << "<polyline points=\"" << line << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            svg << "<circle cx=\"" << svg_number(sx(s.x[i])) << "\" cy=\"" << svg_number(sy(s.mean[i]))
                << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        const double ly = top + 16 + 18.0 * static_cast<double>(k);
        svg << "<line x1=\"" << svg_number(left + pw - 170) << "\" y1=\"" << svg_number(ly) << "\" x2=\""
            << svg_number(left + pw - 150) << "\" y2=\"" << svg_number(ly) << "\" stroke=\"" << color
            << "\" stroke-width=\"3\"/>\n";
        svg << "<text class=\"legend\" x=\"" << svg_number(left + pw - 144) << "\" y=\"" << svg_number(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << svg_escape(s.label) << "</text>\n</g>\n";
    }
    svg << "</svg>\n";

    const fs::path out(out_path);
    if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
    std::ofstream os(out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write chart '" + out_path + "'");
    os << svg.str();
}

}  // namespace ccep
