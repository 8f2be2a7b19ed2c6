#include "ccep/harness.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ccep {
namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

class HarnessTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("ccep_harness_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    RunConfig tiny(const std::string& env = "pendulum", Algorithm algo = Algorithm::ccep) const {
        RunConfig c;
        c.env = env;
        c.agent.algorithm = algo;
        c.agent.hidden_sizes = {8};
        c.agent.batch_size = 8;
        c.agent.warmup_steps = 20;
        c.agent.total_steps = 60;
        c.agent.buffer_capacity = 1000;
        c.eval_interval = 20;
        c.eval_episodes = 2;
        c.output_dir = (dir_ / "out").string();
        return c;
    }

    fs::path dir_;
};

TEST(RunConfigJson, EmptyObjectGivesDefaults) {
    const RunConfig c = config_from_json(Json::parse(R"({"env": "pendulum"})"));
    EXPECT_EQ(c.agent.gamma, 0.99);
    EXPECT_EQ(c.agent.tau, 0.005);
    EXPECT_EQ(c.agent.batch_size, 256u);
    EXPECT_EQ(c.agent.policy_delay, 2u);
    EXPECT_EQ(c.eval_interval, 5000u);
    EXPECT_EQ(c.eval_episodes, 10u);
    EXPECT_EQ(c, RunConfig{});
}

TEST(RunConfigJson, RejectsInvalidValues) {
    EXPECT_THROW(config_from_json(Json::parse(R"({"gamma": 1.5})")), std::invalid_argument);
    EXPECT_THROW(config_from_json(Json::parse(R"({"eval_interval": 0})")), std::invalid_argument);
    EXPECT_THROW(config_from_json(Json::parse(R"({"algorithm": "sac"})")), std::invalid_argument);
    EXPECT_THROW(config_from_json(Json::parse(R"({"env": "cartpole"})")), std::invalid_argument);
}

TEST(RunConfigJson, RejectsUnknownKeysAndWrongTypes) {
    try {
        config_from_json(Json::parse(R"({"gama": 0.9})"));
        FAIL() << "unknown key accepted";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("gama"), std::string::npos);
    }
    EXPECT_THROW(config_from_json(Json::parse(R"({"batch_size": "big"})")), std::invalid_argument);
    EXPECT_THROW(config_from_json(Json::parse(R"([1, 2])")), std::invalid_argument);
}

TEST_F(HarnessTest, ConfigFileRoundTrip) {
    RunConfig c = tiny("pointmaze", Algorithm::ccep_separate);
    c.agent.opposite_targets = false;
    c.agent.gamma = 0.95;
    c.agent.lr_actor = 1.234567890123e-4;
    c.seeds = {4, 2, 9};
    c.eval_mode = EvalMode::per_style;
    c.maze.walls.push_back({0.5, 0.0, 0.5, 0.2});
    c.save_snapshots = true;
    const auto path = (dir_ / "cfg.json").string();
    save_config(path, c);
    EXPECT_EQ(load_config(path), c);
    EXPECT_EQ(config_from_json(to_json(RunConfig{})), RunConfig{});
}

TEST_F(HarnessTest, LoadConfigReportsPath) {
    const auto bad = dir_ / "bad.json";
    std::ofstream(bad) << "{ not json";
    try {
        load_config(bad.string());
        FAIL();
    } catch (const std::exception& e) {
        EXPECT_NE(std::string(e.what()).find("bad.json"), std::string::npos);
    }
    EXPECT_THROW(load_config((dir_ / "missing.json").string()), std::runtime_error);
}

TEST(Csv, NumbersRoundTripExactly) {
    for (double x : {0.1, -1234.5678901234567, 1e-300, 2.0 / 3.0, 0.0})
        EXPECT_EQ(parse_number(format_number(x)), x);
    EXPECT_EQ(csv_header(4), "step,return_mean,return_std,style0_return,style1_return,style2_return,style3_return,"
                             "controversy,coverage");
    EXPECT_EQ(csv_header(1), "step,return_mean,return_std,style0_return,controversy,coverage");
}

TEST_F(HarnessTest, SameSeedGivesByteIdenticalCsv) {
    const auto c = tiny();
    const auto a = run(c, dir_ / "a.csv");
    const auto b = run(c, dir_ / "b.csv");
    EXPECT_EQ(slurp(a.csv_path), slurp(b.csv_path));
    auto other = c;
    other.agent.seed = 1;
    EXPECT_NE(slurp(run(other, dir_ / "c.csv").csv_path), slurp(a.csv_path));
}

TEST_F(HarnessTest, CsvRowsFollowSchedule) {
    const auto r = run(tiny());
    const auto t = read_csv(r.csv_path.string());
    EXPECT_EQ(t.header.size(), 9u);
    ASSERT_EQ(t.rows.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(t.rows[i][0], 20.0 * static_cast<double>(i));
    for (const auto& row : t.rows) {
        EXPECT_GE(row[t.column("coverage")], 0.0);
        EXPECT_LE(row[t.column("coverage")], 1.0);
        EXPECT_GE(row[t.column("controversy")], 0.0);
    }
    EXPECT_EQ(t.rows[0][t.column("controversy")], 0.0);
    EXPECT_EQ(r.csv_path.filename(), "pendulum_ccep_seed0.csv");
    const std::string bytes = slurp(r.csv_path);
    EXPECT_EQ(bytes.find('\r'), std::string::npos);
    EXPECT_EQ(bytes.back(), '\n');
}

TEST_F(HarnessTest, ShortRunHasOnlyStepZeroRow) {
    auto c = tiny();
    c.agent.total_steps = 10;
    c.eval_interval = 50;
    const auto r = run(c);
    const std::string bytes = slurp(r.csv_path);
    EXPECT_EQ(std::count(bytes.begin(), bytes.end(), '\n'), 2);
    EXPECT_EQ(bytes.substr(0, bytes.find('\n')), csv_header(4));
    EXPECT_EQ(bytes.substr(bytes.find('\n') + 1, 2), "0,");
}

TEST_F(HarnessTest, TracksDivergenceForMultipleStyles) {
    const auto r = run(tiny("pointmaze"));
    ASSERT_TRUE(r.divergence.has_value());
    EXPECT_EQ(r.divergence->unique_cells.size(), 4u);
    EXPECT_GT(r.final_coverage, 0.0);
    const auto td3 = run(tiny("pointmaze", Algorithm::td3));
    EXPECT_FALSE(td3.divergence.has_value());
}

TEST_F(HarnessTest, OutputRootEnvironmentVariable) {
    auto c = tiny();
    c.output_dir = "relative_runs";
    const auto root = dir_ / "root";
    ::setenv(output_root_env, root.c_str(), 1);
    const auto r = run(c);
    ::unsetenv(output_root_env);
    EXPECT_TRUE(fs::exists(root / "relative_runs" / "pendulum_ccep_seed0.csv"));
    EXPECT_EQ(r.csv_path, root / "relative_runs" / "pendulum_ccep_seed0.csv");
}

TEST_F(HarnessTest, SnapshotsWrittenWhenRequested) {
    auto c = tiny();
    c.save_snapshots = true;
    run(c);
    EXPECT_TRUE(fs::exists(dir_ / "out" / "pendulum_ccep_seed0_snapshots" / "step_60" / "actor_0.bin"));
}

TEST_F(HarnessTest, SingleSeedBenchHasZeroStd) {
    BenchPlan plan;
    plan.base = tiny();
    plan.base.seeds = {3};
    const auto rep = bench(plan);
    ASSERT_EQ(rep.cells.size(), 1u);
    const auto& cell = rep.cells[0];
    const auto& single = *cell.seeds[0].result;
    ASSERT_EQ(cell.aggregate.size(), single.rows.size());
    for (std::size_t i = 0; i < single.rows.size(); ++i) {
        EXPECT_EQ(cell.aggregate[i].return_mean, single.rows[i].return_mean);
        EXPECT_EQ(cell.aggregate[i].return_std, 0.0);
        EXPECT_EQ(cell.aggregate[i].coverage_std, 0.0);
    }
    EXPECT_TRUE(rep.failures.empty());
    EXPECT_TRUE(fs::exists(cell.aggregate_path));
    EXPECT_TRUE(fs::exists(rep.comparison_path));
}

TEST_F(HarnessTest, BenchIsSeedOrderInvariantAndAveragesSeeds) {
    BenchPlan a, b;
    a.base = tiny();
    a.base.seeds = {1, 2};
    a.base.output_dir = (dir_ / "a").string();
    b.base = a.base;
    b.base.seeds = {2, 1};
    b.base.output_dir = (dir_ / "b").string();
    const auto ra = bench(a);
    const auto rb = bench(b);
    EXPECT_EQ(slurp(ra.cells[0].aggregate_path), slurp(rb.cells[0].aggregate_path));
    EXPECT_EQ(slurp(ra.comparison_path), slurp(rb.comparison_path));

    const auto& s1 = *ra.cells[0].seeds[0].result;
    const auto& s2 = *ra.cells[0].seeds[1].result;
    for (std::size_t i = 0; i < ra.cells[0].aggregate.size(); ++i) {
        const auto& row = ra.cells[0].aggregate[i];
        EXPECT_DOUBLE_EQ(row.return_mean, (s1.rows[i].return_mean + s2.rows[i].return_mean) / 2.0);
        EXPECT_DOUBLE_EQ(row.return_std, std::abs(s1.rows[i].return_mean - s2.rows[i].return_mean) / 2.0);
        EXPECT_DOUBLE_EQ(row.coverage_mean, (s1.rows[i].coverage + s2.rows[i].coverage) / 2.0);
    }
}

TEST_F(HarnessTest, BenchKeepsCompletedSeedsOnPartialFailure) {
    BenchPlan plan;
    plan.base = tiny("pendulum", Algorithm::td3);
    plan.base.seeds = {1, 2};
    fs::create_directories(dir_ / "out" / "pendulum_td3_seed2.csv");
    const auto rep = bench(plan);
    ASSERT_EQ(rep.failures.size(), 1u);
    EXPECT_NE(rep.failures[0].find("seed 2"), std::string::npos);
    EXPECT_EQ(rep.cells[0].completed(), 1u);
    EXPECT_EQ(rep.cells[0].aggregate.size(), rep.cells[0].seeds[0].result->rows.size());
    const auto cmp = slurp(rep.comparison_path);
    EXPECT_NE(cmp.find("pendulum,td3,1,"), std::string::npos);
}

TEST_F(HarnessTest, BenchCoversAlgorithmsAndEnvironments) {
    BenchPlan plan;
    plan.base = tiny();
    plan.envs = {"pendulum", "pointmaze"};
    plan.algorithms = {Algorithm::ccep, Algorithm::ccep_separate};
    plan.jobs = 2;
    const auto rep = bench(plan);
    EXPECT_EQ(rep.cells.size(), 4u);
    const std::string cmp = slurp(rep.comparison_path);
    EXPECT_EQ(std::count(cmp.begin(), cmp.end(), '\n'), 5);
    EXPECT_EQ(cmp.rfind("env,algorithm,", 0), 0u);
    EXPECT_NE(cmp.find("pointmaze,ccep-separate,1,"), std::string::npos);
}

TEST_F(HarnessTest, ControversyExperimentWritesBothConditions) {
    auto c = tiny("pendulum", Algorithm::td3);
    c.seeds = {1};
    const auto rep = controversy_experiment(c, 2);
    ASSERT_EQ(rep.seeds.size(), 1u);
    EXPECT_TRUE(fs::exists(dir_ / "out" / "same" / "pendulum_td3_seed1.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "out" / "opposite" / "pendulum_td3_seed1.csv"));
    EXPECT_TRUE(fs::exists(rep.csv_path));
    EXPECT_GE(rep.seeds[0].same_target, 0.0);
}

class PlotTest : public HarnessTest {
protected:
    fs::path write_csv(const std::string& name, const std::string& body) {
        const auto p = dir_ / name;
        std::ofstream(p, std::ios::binary) << body;
        return p;
    }
};

TEST_F(PlotTest, SingleRowGivesOnePointPerSeries) {
    const auto p = write_csv("only.csv", "step,return_mean,return_std,controversy,coverage\n0,-5,1,0,0.1\n");
    const auto out = dir_ / "one.svg";
    plot({p.string()}, out.string());
    const std::string svg = slurp(out);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    std::size_t circles = 0;
    for (auto pos = svg.find("<circle"); pos != std::string::npos; pos = svg.find("<circle", pos + 1)) ++circles;
    EXPECT_EQ(circles, 1u);
}

TEST_F(PlotTest, DeterministicAndLabelsSeries) {
    const std::string header = "step,return_mean,return_std,controversy,coverage\n";
    const auto a = write_csv("ccep_run.csv", header + "0,-10,2,0,0\n100,-5,1,0.1,0.2\n");
    const auto b = write_csv("td3_run.csv", header + "0,-12,3,0,0\n100,-7,1,0.2,0.3\n");
    plot({a.string(), b.string()}, (dir_ / "x.svg").string());
    plot({a.string(), b.string()}, (dir_ / "y.svg").string());
    const std::string svg = slurp(dir_ / "x.svg");
    EXPECT_EQ(svg, slurp(dir_ / "y.svg"));
    EXPECT_NE(svg.find(">ccep_run</text>"), std::string::npos);
    EXPECT_NE(svg.find(">td3_run</text>"), std::string::npos);
    std::size_t lines = 0;
    for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++lines;
    EXPECT_EQ(lines, 2u);
}

TEST_F(PlotTest, RejectsSchemaMismatch) {
    const auto a = write_csv("a.csv", "step,return_mean,return_std,controversy,coverage\n0,1,0,0,0\n");
    const auto b = write_csv("b.csv", "step,return_mean,return_std,style0_return,controversy,coverage\n0,1,0,1,0,0\n");
    EXPECT_THROW(plot({a.string(), b.string()}, (dir_ / "z.svg").string()), std::invalid_argument);
}

TEST(MovingAverage, TrailingWindow) {
    EXPECT_EQ(moving_average({1, 2, 3, 4}, 1), (std::vector<double>{1, 2, 3, 4}));
    EXPECT_EQ(moving_average({1, 3, 5, 7}, 2), (std::vector<double>{1, 2, 4, 6}));
}

}  // namespace
}  // namespace ccep
