#pragma once

// Twin critics with optional output negation, the four styled value
// estimators, the skill-conditioned actor and the CCEP / CCEP-separate /
// TD3 / DDPG update rules and training loop.

#include "ccep/envs.hpp"
#include "ccep/numerics.hpp"
#include "ccep/replay.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccep {

using Rng = std::mt19937_64;

// splitmix64 of (seed, stream): independent generator seeds per purpose.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t x = seed ^ (stream * 0x9E3779B97F4A7C15ull);
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

namespace stream {
inline constexpr std::uint64_t critic1 = 1, critic2 = 2, actor = 16;
inline constexpr std::uint64_t env = 100, skill = 101, explore = 102, update = 103, metrics = 104, eval = 105;
}  // namespace stream

enum class Algorithm { ccep, ccep_separate, td3, ddpg };

inline std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::ccep: return "ccep";
        case Algorithm::ccep_separate: return "ccep-separate";
        case Algorithm::td3: return "td3";
        case Algorithm::ddpg: return "ddpg";
    }
    return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
    if (s == "ccep") return Algorithm::ccep;
    if (s == "ccep-separate") return Algorithm::ccep_separate;
    if (s == "td3") return Algorithm::td3;
    if (s == "ddpg") return Algorithm::ddpg;
    throw std::invalid_argument("unknown algorithm '" + s + "' (expected ccep, ccep-separate, td3 or ddpg)");
}

// Noise magnitudes are fractions of the environment's action bound.
struct CcepConfig {
    Algorithm algorithm = Algorithm::ccep;
    double lr_actor = 3e-4;
    double lr_critic = 3e-4;
    std::size_t batch_size = 256;
    double gamma = 0.99;
    double tau = 5e-3;
    std::size_t policy_delay = 2;
    double target_noise = 0.2;
    double noise_clip = 0.5;
    double exploration_noise = 0.1;
    std::size_t warmup_steps = 25'000;
    std::size_t buffer_capacity = 1'000'000;
    std::size_t num_styles = 4;
    std::size_t total_steps = 1'000'000;
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden_sizes{256, 256};
    // Unset: on for ccep and ccep-separate, off for td3 and ddpg.
    std::optional<bool> opposite_targets;

    bool operator==(const CcepConfig&) const = default;

    void validate() const {
        auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
        if (!(lr_actor > 0.0) || !(lr_critic > 0.0)) fail("learning rates must be > 0");
        if (batch_size == 0) fail("batch_size must be >= 1");
        if (!(gamma > 0.0 && gamma < 1.0)) fail("gamma must satisfy 0 < gamma < 1");
        if (!(tau > 0.0 && tau <= 1.0)) fail("tau must satisfy 0 < tau <= 1");
        if (policy_delay == 0) fail("policy_delay must be >= 1");
        if (!(target_noise >= 0.0) || !(noise_clip >= 0.0) || !(exploration_noise >= 0.0))
            fail("noise parameters must be >= 0");
        if (buffer_capacity == 0) fail("buffer_capacity must be >= 1");
        if (num_styles == 0 || num_styles > 4) fail("num_styles must be in [1, 4]");
        if (hidden_sizes.empty()) fail("hidden_sizes must list at least one layer");
        for (auto h : hidden_sizes)
            if (h == 0) fail("hidden layer sizes must be >= 1");
    }

    std::size_t styles() const {
        return (algorithm == Algorithm::td3 || algorithm == Algorithm::ddpg) ? 1 : num_styles;
    }
    bool twin_critics() const { return algorithm != Algorithm::ddpg; }
    bool negate_second() const {
        if (!twin_critics()) return false;
        if (opposite_targets) return *opposite_targets;
        return algorithm == Algorithm::ccep || algorithm == Algorithm::ccep_separate;
    }
    std::size_t effective_policy_delay() const { return algorithm == Algorithm::ddpg ? 1 : policy_delay; }
    bool target_smoothing() const { return algorithm != Algorithm::ddpg; }
    bool centralized_actor() const { return algorithm != Algorithm::ccep_separate; }
};

// ---------------------------------------------------------------------------
// Skill labels

inline std::vector<double> one_hot(int z, std::size_t k) {
    if (z < 0 || static_cast<std::size_t>(z) >= k)
        throw std::out_of_range("one_hot: skill " + std::to_string(z) + " outside [0, " + std::to_string(k) + ")");
    std::vector<double> v(k, 0.0);
    v[static_cast<std::size_t>(z)] = 1.0;
    return v;
}

inline Matrix hstack(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
}

inline Matrix row_matrix(std::span<const double> v) {
    return Eigen::Map<const Matrix>(v.data(), 1, static_cast<Eigen::Index>(v.size()));
}

// ---------------------------------------------------------------------------
// Critics

struct CriticEnsemble {
    NetworkParams net1, net2;
    NetworkParams target1, target2;
    bool negate_second = false;
    bool twin = true;

    const NetworkParams& net(int i, bool use_target) const {
        if (i == 1) return use_target ? target1 : net1;
        if (i == 2) return use_target ? target2 : net2;
        throw std::out_of_range("CriticEnsemble: critic index must be 1 or 2");
    }
    double sign(int i) const { return (i == 2 && negate_second) ? -1.0 : 1.0; }
};

inline CriticEnsemble make_critics(std::size_t obs_dim, std::size_t act_dim, const std::vector<std::size_t>& hidden,
                                   bool negate_second, bool twin, std::uint64_t seed1, std::uint64_t seed2) {
    NetConfig nc;
    nc.layer_sizes.push_back(obs_dim + act_dim);
    nc.layer_sizes.insert(nc.layer_sizes.end(), hidden.begin(), hidden.end());
    nc.layer_sizes.push_back(1);
    CriticEnsemble c;
    c.net1 = init_params(nc, seed1);
    c.net2 = init_params(nc, seed2);
    c.target1 = c.net1;
    c.target2 = c.net2;
    c.negate_second = negate_second;
    c.twin = twin;
    return c;
}

// Post-negation critic values for each row of concat(s, a).
inline Vector critic_values(const CriticEnsemble& c, int i, const Matrix& state_action, bool use_target,
                            ForwardCache* cache = nullptr) {
    Matrix out = forward(c.net(i, use_target), state_action, cache);
    return c.sign(i) * out.col(0);
}

inline double critic_raw(const CriticEnsemble& c, int i, std::span<const double> s, std::span<const double> a,
                         bool use_target) {
    return critic_values(c, i, hstack(row_matrix(s), row_matrix(a)), use_target)(0);
}

// Which underlying critic a style reads: 0 -> Q1, 1 -> Q2, 2 -> max, 3 -> min.
// Ties go to critic 1.
inline int style_route(int j, double q1, double q2) {
    switch (j) {
        case 0: return 1;
        case 1: return 2;
        case 2: return q1 >= q2 ? 1 : 2;
        case 3: return q1 <= q2 ? 1 : 2;
        default: throw std::out_of_range("styled_q: style must be in {0, 1, 2, 3}");
    }
}

inline double combine_style(int j, double q1, double q2) { return style_route(j, q1, q2) == 1 ? q1 : q2; }

inline double styled_q(const CriticEnsemble& c, int j, std::span<const double> s, std::span<const double> a) {
    if (j < 0 || j > 3) throw std::out_of_range("styled_q: style must be in {0, 1, 2, 3}");
    const Matrix sa = hstack(row_matrix(s), row_matrix(a));
    const double q1 = critic_values(c, 1, sa, false)(0);
    const double q2 = critic_values(c, 2, sa, false)(0);
    return combine_style(j, q1, q2);
}

// ---------------------------------------------------------------------------
// Actor

// One network fed concat(s, one_hot(z)) when centralized; otherwise one
// network per style fed s alone.
struct Actor {
    std::vector<NetworkParams> nets;
    std::vector<NetworkParams> targets;
    std::size_t num_styles = 1;
    bool centralized = true;
    double act_bound = 1.0;

    Matrix act(const Matrix& states, const std::vector<int>& skills, bool use_target) const {
        const auto& ps = use_target ? targets : nets;
        const auto n = states.rows();
        if (static_cast<std::size_t>(n) != skills.size()) throw std::invalid_argument("Actor::act: skills/rows mismatch");
        if (centralized) {
            Matrix x = Matrix::Zero(n, states.cols() + static_cast<Eigen::Index>(num_styles));
            x.leftCols(states.cols()) = states;
            for (Eigen::Index r = 0; r < n; ++r) {
                const int z = skills[static_cast<std::size_t>(r)];
                check_skill(z);
                x(r, states.cols() + z) = 1.0;
            }
            return forward(ps[0], x);
        }
        const auto act_dim = static_cast<Eigen::Index>(ps[0].config.output_size());
        Matrix out(n, act_dim);
        for (std::size_t j = 0; j < num_styles; ++j) {
            std::vector<Eigen::Index> rows;
            for (Eigen::Index r = 0; r < n; ++r) {
                check_skill(skills[static_cast<std::size_t>(r)]);
                if (skills[static_cast<std::size_t>(r)] == static_cast<int>(j)) rows.push_back(r);
            }
            if (rows.empty()) continue;
            Matrix sub(static_cast<Eigen::Index>(rows.size()), states.cols());
            for (std::size_t k = 0; k < rows.size(); ++k) sub.row(static_cast<Eigen::Index>(k)) = states.row(rows[k]);
            Matrix a = forward(ps[j], sub);
            for (std::size_t k = 0; k < rows.size(); ++k) out.row(rows[k]) = a.row(static_cast<Eigen::Index>(k));
        }
        return out;
    }

    std::vector<double> act(std::span<const double> s, int z, bool use_target = false) const {
        Matrix a = act(row_matrix(s), std::vector<int>{z}, use_target);
        return {a.data(), a.data() + a.size()};
    }

    void check_skill(int z) const {
        if (z < 0 || static_cast<std::size_t>(z) >= num_styles)
            throw std::out_of_range("Actor: skill " + std::to_string(z) + " out of range");
    }
};

using CentralizedActor = Actor;

inline Actor make_actor(std::size_t obs_dim, std::size_t act_dim, double act_bound, const std::vector<std::size_t>& hidden,
                        std::size_t num_styles, bool centralized, std::uint64_t seed) {
    Actor a;
    a.num_styles = num_styles;
    a.centralized = centralized;
    a.act_bound = act_bound;
    NetConfig nc;
    nc.layer_sizes.push_back(obs_dim + (centralized ? num_styles : 0));
    nc.layer_sizes.insert(nc.layer_sizes.end(), hidden.begin(), hidden.end());
    nc.layer_sizes.push_back(act_dim);
    nc.head = OutputHead::bounded;
    nc.scale = act_bound;
    const std::size_t count = centralized ? 1 : num_styles;
    for (std::size_t j = 0; j < count; ++j) a.nets.push_back(init_params(nc, derive_seed(seed, j)));
    a.targets = a.nets;
    return a;
}

// ---------------------------------------------------------------------------
// Updates

// y = r + gamma * (1 - done) * min_i Q'_i(s', a'), with
// a' = clip(pi'(s', z') + clip(eps, -c, c)), eps ~ N(0, target_noise^2),
// all noise terms scaled by the action bound. Without target smoothing
// (DDPG) a' = pi'(s', z') and only critic 1 is used.
template <typename R>
Vector td_target(const CriticEnsemble& critics, const Actor& actor, const Batch& batch, R& rng, const CcepConfig& cfg) {
    if (batch.size() == 0) throw std::invalid_argument("td_target: empty batch");
    Matrix next_a = actor.act(batch.next_states, batch.next_skills, true);
    if (cfg.target_smoothing()) {
        const double bound = actor.act_bound;
        const double sigma = cfg.target_noise * bound;
        const double clip = cfg.noise_clip * bound;
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index r = 0; r < next_a.rows(); ++r) {
            for (Eigen::Index c = 0; c < next_a.cols(); ++c) {
                const double eps = std::clamp(sigma * normal(rng), -clip, clip);
                next_a(r, c) = std::clamp(next_a(r, c) + eps, -bound, bound);
            }
        }
    }
    const Matrix sa = hstack(batch.next_states, next_a);
    Vector q = critic_values(critics, 1, sa, true);
    if (critics.twin) q = q.cwiseMin(critic_values(critics, 2, sa, true));
    return batch.rewards.array() + cfg.gamma * (1.0 - batch.dones.array()) * q.array();
}

struct CriticLosses {
    double loss1 = 0.0;
    double loss2 = 0.0;
};

// One Adam step per critic on the mean-squared error between the
// post-negation output and y.
inline CriticLosses critic_update(CriticEnsemble& critics, const Batch& batch, const Vector& targets, AdamState& opt1,
                                  AdamState& opt2, double lr) {
    const auto n = static_cast<double>(batch.size());
    const Matrix sa = hstack(batch.states, batch.actions);
    CriticLosses losses;
    auto step = [&](int i, NetworkParams& net, AdamState& opt) {
        ForwardCache cache;
        const Vector q = critic_values(critics, i, sa, false, &cache);
        const Vector err = q - targets;
        const double loss = err.squaredNorm() / n;
        Matrix grad = (critics.sign(i) * 2.0 / n) * err;
        const auto br = backward(net, cache, grad);
        adam_step(net, br.grads, opt, lr);
        return loss;
    };
    losses.loss1 = step(1, critics.net1, opt1);
    if (critics.twin) losses.loss2 = step(2, critics.net2, opt2);
    return losses;
}

// Gradient of weight * sum_r Q^{style_r}(s_r, a_r) w.r.t. the actions,
// routed through whichever critic each style selects. Returns the weighted
// objective.
inline double styled_action_gradient(const CriticEnsemble& critics, const Matrix& states, const Matrix& actions,
                                     const std::vector<int>& styles, double weight, Matrix& action_grad) {
    const auto n = states.rows();
    bool need1 = false, need2 = false;
    for (int j : styles) {
        if (j < 0 || j > 3) throw std::out_of_range("policy_update: style must be in {0, 1, 2, 3}");
        need1 |= (j != 1);
        need2 |= (j != 0);
    }
    if (need2 && !critics.twin) throw std::logic_error("policy_update: style needs the second critic");
    const Matrix sa = hstack(states, actions);
    ForwardCache c1, c2;
    Vector q1, q2;
    if (need1) q1 = critic_values(critics, 1, sa, false, &c1);
    if (need2) q2 = critic_values(critics, 2, sa, false, &c2);

    Matrix g1 = Matrix::Zero(n, 1), g2 = Matrix::Zero(n, 1);
    double objective = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
        const int j = styles[static_cast<std::size_t>(r)];
        const double a = need1 ? q1(r) : 0.0;
        const double b = need2 ? q2(r) : 0.0;
        if (style_route(j, a, b) == 1) {
            g1(r, 0) = weight;
            objective += weight * a;
        } else {
            g2(r, 0) = critics.sign(2) * weight;
            objective += weight * b;
        }
    }
    if (need1) action_grad = input_gradient(critics.net1, c1, g1).rightCols(actions.cols());
    if (need2) {
        Matrix d2 = input_gradient(critics.net2, c2, g2).rightCols(actions.cols());
        if (need1) action_grad += d2;
        else action_grad = std::move(d2);
    }
    return objective;
}

struct PolicyGradient {
    std::vector<Gradients> grads;  // descent direction of -J, one per actor network
    double objective = 0.0;        // J
};

// Gradient of the policy objective J = (N*K)^-1 sum_{s, j} Q^j(s, pi(s, j))
// for a centralized actor. Separate actors each get the gradient of their
// own N^-1 sum_s Q^j(s, pi_j(s)); the objective is then the mean over styles.
inline PolicyGradient policy_gradient(const Actor& actor, const CriticEnsemble& critics, const Matrix& states) {
    const auto n = states.rows();
    const std::size_t k = actor.num_styles;
    if (n == 0) throw std::invalid_argument("policy_update: empty batch");
    PolicyGradient pg;
    if (actor.centralized) {
        const auto obs = states.cols();
        const auto kk = static_cast<Eigen::Index>(k);
        Matrix x = Matrix::Zero(n * kk, obs + kk);
        Matrix s_rep(n * kk, obs);
        std::vector<int> styles(static_cast<std::size_t>(n * kk));
        for (Eigen::Index j = 0; j < kk; ++j) {
            x.block(j * n, 0, n, obs) = states;
            x.block(j * n, obs + j, n, 1).setOnes();
            s_rep.middleRows(j * n, n) = states;
            std::fill_n(styles.begin() + j * n, n, static_cast<int>(j));
        }
        ForwardCache cache;
        const Matrix a = forward(actor.nets[0], x, &cache);
        Matrix da;
        pg.objective = styled_action_gradient(critics, s_rep, a, styles, 1.0 / static_cast<double>(n * kk), da);
        pg.grads.push_back(backward(actor.nets[0], cache, -da).grads);
        return pg;
    }
    for (std::size_t j = 0; j < k; ++j) {
        ForwardCache cache;
        const Matrix a = forward(actor.nets[j], states, &cache);
        Matrix da;
        const std::vector<int> styles(static_cast<std::size_t>(n), static_cast<int>(j));
        pg.objective += styled_action_gradient(critics, states, a, styles, 1.0 / static_cast<double>(n), da);
        pg.grads.push_back(backward(actor.nets[j], cache, -da).grads);
    }
    pg.objective /= static_cast<double>(k);
    return pg;
}

// One Adam ascent step on the policy objective; returns J before the step.
inline double policy_update(Actor& actor, const CriticEnsemble& critics, const Matrix& states,
                            std::vector<AdamState>& opts, double lr) {
    if (opts.size() != actor.nets.size()) throw std::invalid_argument("policy_update: optimizer count mismatch");
    const PolicyGradient pg = policy_gradient(actor, critics, states);
    for (std::size_t j = 0; j < actor.nets.size(); ++j) adam_step(actor.nets[j], pg.grads[j], opts[j], lr);
    return pg.objective;
}

// pi(s, z) plus N(0, noise_std^2) per dimension, clipped to the action box.
template <typename R>
std::vector<double> select_action(const Actor& actor, std::span<const double> s, int z, double noise_std, R& rng) {
    std::vector<double> a = actor.act(s, z);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : a) {
        if (noise_std > 0.0) v += noise_std * normal(rng);
        v = std::clamp(v, -actor.act_bound, actor.act_bound);
    }
    return a;
}

// Mean |Q1 - Q2| (post-negation) at a = pi(s, z) for the batch's stored z.
inline double controversy(const CriticEnsemble& critics, const Matrix& states, const std::vector<int>& skills,
                          const Actor& actor) {
    if (states.rows() == 0) throw std::invalid_argument("controversy: empty batch");
    if (!critics.twin) return 0.0;
    const Matrix sa = hstack(states, actor.act(states, skills, false));
    const Vector q1 = critic_values(critics, 1, sa, false);
    const Vector q2 = critic_values(critics, 2, sa, false);
    return (q1 - q2).cwiseAbs().mean();
}

// ---------------------------------------------------------------------------
// Agent

struct UpdateInfo {
    CriticLosses critic;
    bool policy_updated = false;
    double objective = 0.0;
};

class Agent {
public:
    Agent(const CcepConfig& cfg, const EnvSpec& env) : cfg_(cfg), env_(env) {
        cfg_.validate();
        critics_ = make_critics(env.obs_dim, env.act_dim, cfg_.hidden_sizes, cfg_.negate_second(), cfg_.twin_critics(),
                                derive_seed(cfg_.seed, stream::critic1), derive_seed(cfg_.seed, stream::critic2));
        actor_ = make_actor(env.obs_dim, env.act_dim, env.act_bound, cfg_.hidden_sizes, cfg_.styles(),
                            cfg_.centralized_actor(), derive_seed(cfg_.seed, stream::actor));
        critic_opt1_ = make_adam_state(critics_.net1);
        critic_opt2_ = make_adam_state(critics_.net2);
        for (const auto& net : actor_.nets) actor_opts_.push_back(make_adam_state(net));
    }

    const CcepConfig& config() const { return cfg_; }
    const EnvSpec& env_spec() const { return env_; }
    std::size_t num_styles() const { return actor_.num_styles; }
    std::size_t update_count() const { return updates_; }
    const CriticEnsemble& critics() const { return critics_; }
    const Actor& actor() const { return actor_; }
    CriticEnsemble& critics() { return critics_; }
    Actor& actor() { return actor_; }

    std::vector<double> act(std::span<const double> obs, int z) const { return actor_.act(obs, z); }

    template <typename R>
    std::vector<double> explore(std::span<const double> obs, int z, R& rng) const {
        return select_action(actor_, obs, z, cfg_.exploration_noise * env_.act_bound, rng);
    }

    // One training iteration: critic step every call, actor and target
    // soft-updates every policy_delay calls.
    template <typename R>
    UpdateInfo update(const ReplayBuffer& buffer, R& rng) {
        ++updates_;
        const Batch batch = buffer.sample(cfg_.batch_size, rng);
        const Vector y = td_target(critics_, actor_, batch, rng, cfg_);
        UpdateInfo info;
        info.critic = critic_update(critics_, batch, y, critic_opt1_, critic_opt2_, cfg_.lr_critic);
        if (updates_ % cfg_.effective_policy_delay() == 0) {
            info.objective = policy_update(actor_, critics_, batch.states, actor_opts_, cfg_.lr_actor);
            info.policy_updated = true;
            soft_update(critics_.target1, critics_.net1, cfg_.tau);
            if (critics_.twin) soft_update(critics_.target2, critics_.net2, cfg_.tau);
            for (std::size_t j = 0; j < actor_.nets.size(); ++j) soft_update(actor_.targets[j], actor_.nets[j], cfg_.tau);
        }
        return info;
    }

    double controversy(const Batch& batch) const { return ccep::controversy(critics_, batch.states, batch.skills, actor_); }

    // Writes actor_<j>.bin, critic1.bin and (twin) critic2.bin into `dir`.
    void save_snapshot(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        for (std::size_t j = 0; j < actor_.nets.size(); ++j)
            save_params((dir / ("actor_" + std::to_string(j) + ".bin")).string(), actor_.nets[j]);
        save_params((dir / "critic1.bin").string(), critics_.net1);
        if (critics_.twin) save_params((dir / "critic2.bin").string(), critics_.net2);
    }

private:
    CcepConfig cfg_;
    EnvSpec env_;
    CriticEnsemble critics_;
    Actor actor_;
    AdamState critic_opt1_, critic_opt2_;
    std::vector<AdamState> actor_opts_;
    std::size_t updates_ = 0;
};

// ---------------------------------------------------------------------------
// Training loop

struct TrainHooks {
    // Called at step 0 and after every `checkpoint_interval` environment steps.
    std::size_t checkpoint_interval = 0;
    std::function<void(std::size_t step, const Agent&, const ReplayBuffer&)> on_checkpoint;
    // Every visited state's 2-D projection. `skill` is the style whose action
    // produced the state, or -1 for reset states and warmup steps.
    std::function<void(const std::array<double, 2>& point, int skill)> on_visit;
    std::function<void(const Transition&, const Agent&)> on_transition;
};

struct TrainResult {
    std::size_t env_steps = 0;
    std::size_t updates = 0;
    std::size_t episodes = 0;
    std::size_t buffer_size = 0;
};

inline TrainResult train(const CcepConfig& cfg, Environment& env, const TrainHooks& hooks = {}) {
    cfg.validate();
    const EnvSpec spec = env.spec();
    Agent agent(cfg, spec);
    ReplayBuffer buffer(cfg.buffer_capacity);

    Rng env_rng(derive_seed(cfg.seed, stream::env));
    Rng skill_rng(derive_seed(cfg.seed, stream::skill));
    Rng explore_rng(derive_seed(cfg.seed, stream::explore));
    Rng update_rng(derive_seed(cfg.seed, stream::update));
    std::uniform_int_distribution<int> pick_skill(0, static_cast<int>(agent.num_styles()) - 1);
    std::uniform_real_distribution<double> uniform_action(-spec.act_bound, spec.act_bound);

    auto visit = [&](int skill) {
        if (hooks.on_visit) hooks.on_visit(env.coverage_point(), skill);
    };

    TrainResult result;
    std::vector<double> obs = env.reset(env_rng());
    visit(-1);
    int z = pick_skill(skill_rng);
    if (hooks.checkpoint_interval > 0 && hooks.on_checkpoint) hooks.on_checkpoint(0, agent, buffer);

    for (std::size_t t = 0; t < cfg.total_steps; ++t) {
        const bool warm = t < cfg.warmup_steps;
        std::vector<double> a;
        if (warm) {
            a.resize(spec.act_dim);
            for (auto& v : a) v = uniform_action(explore_rng);
        } else {
            a = agent.explore(obs, z, explore_rng);
        }
        StepResult res = env.step(a);
        const int z_next = pick_skill(skill_rng);
        Transition tr{obs, z, a, res.reward, res.next_obs, z_next, res.terminated()};
        buffer.push(tr);
        if (hooks.on_transition) hooks.on_transition(tr, agent);
        visit(warm ? -1 : z);
        if (res.done) {
            ++result.episodes;
            obs = env.reset(env_rng());
            visit(-1);
        } else {
            obs = std::move(res.next_obs);
        }
        z = z_next;
        if (!warm) agent.update(buffer, update_rng);
        if (hooks.checkpoint_interval > 0 && hooks.on_checkpoint && (t + 1) % hooks.checkpoint_interval == 0)
            hooks.on_checkpoint(t + 1, agent, buffer);
    }
    result.env_steps = cfg.total_steps;
    result.updates = agent.update_count();
    result.buffer_size = buffer.size();
    return result;
}

}  // namespace ccep
