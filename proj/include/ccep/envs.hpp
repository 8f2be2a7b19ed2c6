#pragma once

// Desk-scale continuous-control environments behind one interface:
// pendulum swing-up (dense reward) and a sparse-reward point-mass maze.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccep {

struct EnvSpec {
    std::size_t obs_dim = 0;
    std::size_t act_dim = 0;
    double act_bound = 0.0;  // symmetric box [-act_bound, act_bound]
    std::size_t max_episode_steps = 0;

    bool operator==(const EnvSpec&) const = default;
};

struct StepResult {
    std::vector<double> next_obs;
    double reward = 0.0;
    bool done = false;       // terminated or truncated
    bool truncated = false;  // time limit reached without termination

    bool terminated() const { return done && !truncated; }
};

// Axis-aligned rectangle used to discretize a 2-D projection of the state.
struct StateBox {
    std::array<double, 2> lo{};
    std::array<double, 2> hi{};
};

class Environment {
public:
    virtual ~Environment() = default;

    virtual std::string name() const = 0;
    virtual EnvSpec spec() const = 0;
    virtual std::vector<double> reset(std::uint64_t seed) = 0;
    virtual StepResult step(std::span<const double> action) = 0;

    // 2-D state projection used for exploration coverage.
    virtual std::array<double, 2> coverage_point() const = 0;
    virtual StateBox coverage_box() const = 0;

    virtual std::unique_ptr<Environment> clone() const = 0;
};

inline double wrap_angle(double x) {
    constexpr double pi = std::numbers::pi;
    x = std::fmod(x + pi, 2.0 * pi);
    if (x <= 0.0) x += 2.0 * pi;
    return x - pi;  // (-pi, pi]
}

namespace detail {

class EpisodeClock {
public:
    void start(std::size_t limit) {
        limit_ = limit;
        steps_ = 0;
        active_ = true;
    }
    void require_active(const char* env) const {
        if (!active_) throw std::logic_error(std::string(env) + ": step() called after episode end without reset()");
    }
    // Returns true when the time limit is hit by this step.
    bool tick() { return ++steps_ >= limit_; }
    void finish() { active_ = false; }
    std::size_t steps() const { return steps_; }

private:
    std::size_t limit_ = 0;
    std::size_t steps_ = 0;
    bool active_ = false;
};

}  // namespace detail

// Pendulum swing-up. Angle 0 is upright; reward is the negated quadratic
// cost evaluated on the pre-step state and the applied torque.
class Pendulum final : public Environment {
public:
    static constexpr double gravity = 10.0;
    static constexpr double mass = 1.0;
    static constexpr double length = 1.0;
    static constexpr double dt = 0.05;
    static constexpr double max_speed = 8.0;
    static constexpr double max_torque = 2.0;
    static constexpr std::size_t horizon = 200;

    std::string name() const override { return "pendulum"; }
    EnvSpec spec() const override { return {3, 1, max_torque, horizon}; }

    std::vector<double> reset(std::uint64_t seed) override {
        std::mt19937_64 rng(seed);
        constexpr double pi = std::numbers::pi;
        theta_ = std::uniform_real_distribution<double>(-pi, pi)(rng);
        theta_dot_ = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
        clock_.start(horizon);
        return observation();
    }

    StepResult step(std::span<const double> action) override {
        clock_.require_active("pendulum");
        if (action.size() != 1) throw std::invalid_argument("pendulum: action must have length 1");
        const double u = std::clamp(action[0], -max_torque, max_torque);
        const double th = wrap_angle(theta_);
        const double reward = -(th * th + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u);

        const double accel = 3.0 * gravity / (2.0 * length) * std::sin(theta_) + 3.0 / (mass * length * length) * u;
        theta_dot_ = std::clamp(theta_dot_ + accel * dt, -max_speed, max_speed);
        theta_ += theta_dot_ * dt;

        StepResult r{observation(), reward, false, false};
        if (clock_.tick()) {
            r.done = r.truncated = true;
            clock_.finish();
        }
        return r;
    }

    std::array<double, 2> coverage_point() const override { return {wrap_angle(theta_), theta_dot_}; }
    StateBox coverage_box() const override {
        constexpr double pi = std::numbers::pi;
        return {{-pi, -max_speed}, {pi, max_speed}};
    }

    std::unique_ptr<Environment> clone() const override { return std::make_unique<Pendulum>(*this); }

    // Places the pendulum in an explicit state and starts a fresh episode.
    std::vector<double> set_state(double theta, double theta_dot) {
        theta_ = theta;
        theta_dot_ = theta_dot;
        clock_.start(horizon);
        return observation();
    }
    double theta() const { return theta_; }
    double theta_dot() const { return theta_dot_; }

private:
    std::vector<double> observation() const { return {std::cos(theta_), std::sin(theta_), theta_dot_}; }

    double theta_ = 0.0;
    double theta_dot_ = 0.0;
    detail::EpisodeClock clock_;
};

// Axis-aligned wall segment; either x0 == x1 (vertical) or y0 == y1 (horizontal).
struct WallSegment {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    bool vertical() const { return x0 == x1; }
    bool horizontal() const { return y0 == y1; }
    bool operator==(const WallSegment&) const = default;
};

struct MazeLayout {
    std::array<double, 2> start{0.1, 0.1};
    std::array<double, 2> goal{0.9, 0.9};
    double goal_radius = 0.05;
    std::vector<WallSegment> walls;

    bool operator==(const MazeLayout&) const = default;

    // Two horizontal walls leaving alternating gaps: an S-shaped corridor
    // from the bottom-left start to the top-right goal.
    static MazeLayout s_corridor() {
        MazeLayout m;
        m.walls = {{0.0, 1.0 / 3.0, 0.7, 1.0 / 3.0}, {0.3, 2.0 / 3.0, 1.0, 2.0 / 3.0}};
        return m;
    }

    void validate() const {
        for (const auto& w : walls)
            if (!w.vertical() && !w.horizontal())
                throw std::invalid_argument("maze: wall segments must be axis-aligned");
        if (!(goal_radius > 0.0)) throw std::invalid_argument("maze: goal radius must be positive");
    }
};

// Sparse-reward point mass in the unit square. Each action component is a
// displacement clipped to +-0.05. Motion along an axis is cancelled when it
// would touch or cross a wall, so the mass slides along walls but never
// enters them.
class PointMaze final : public Environment {
public:
    static constexpr double max_step = 0.05;
    static constexpr std::size_t horizon = 200;

    PointMaze() : PointMaze(MazeLayout::s_corridor()) {}
    explicit PointMaze(MazeLayout layout) : layout_(std::move(layout)) {
        layout_.validate();
        pos_ = layout_.start;
    }

    std::string name() const override { return "pointmaze"; }
    EnvSpec spec() const override { return {2, 2, max_step, horizon}; }

    std::vector<double> reset(std::uint64_t /*seed*/) override {
        pos_ = layout_.start;
        clock_.start(horizon);
        return {pos_[0], pos_[1]};
    }

    StepResult step(std::span<const double> action) override {
        clock_.require_active("pointmaze");
        if (action.size() != 2) throw std::invalid_argument("pointmaze: action must have length 2");
        for (int axis = 0; axis < 2; ++axis) {
            const double d = std::clamp(action[static_cast<std::size_t>(axis)], -max_step, max_step);
            std::array<double, 2> next = pos_;
            next[static_cast<std::size_t>(axis)] = std::clamp(next[static_cast<std::size_t>(axis)] + d, 0.0, 1.0);
            if (!blocked(pos_, next, axis)) pos_ = next;
        }
        StepResult r{{pos_[0], pos_[1]}, 0.0, false, false};
        if (in_goal()) {
            r.reward = 1.0;
            r.done = true;
            clock_.finish();
        } else if (clock_.tick()) {
            r.done = r.truncated = true;
            clock_.finish();
        }
        return r;
    }

    std::array<double, 2> coverage_point() const override { return pos_; }
    StateBox coverage_box() const override { return {{0.0, 0.0}, {1.0, 1.0}}; }

    std::unique_ptr<Environment> clone() const override { return std::make_unique<PointMaze>(*this); }

    const MazeLayout& layout() const { return layout_; }
    std::array<double, 2> position() const { return pos_; }

    std::vector<double> set_position(double x, double y) {
        pos_ = {std::clamp(x, 0.0, 1.0), std::clamp(y, 0.0, 1.0)};
        clock_.start(horizon);
        return {pos_[0], pos_[1]};
    }

    bool on_wall(std::array<double, 2> p) const {
        for (const auto& w : layout_.walls) {
            if (w.horizontal() && p[1] == w.y0 && p[0] >= std::min(w.x0, w.x1) && p[0] <= std::max(w.x0, w.x1))
                return true;
            if (w.vertical() && p[0] == w.x0 && p[1] >= std::min(w.y0, w.y1) && p[1] <= std::max(w.y0, w.y1))
                return true;
        }
        return false;
    }

private:
    // Movement along one axis from a to b (other coordinate fixed).
    bool blocked(std::array<double, 2> a, std::array<double, 2> b, int axis) const {
        const int other = 1 - axis;
        const auto ax = static_cast<std::size_t>(axis);
        const auto ot = static_cast<std::size_t>(other);
        const double lo = std::min(a[ax], b[ax]);
        const double hi = std::max(a[ax], b[ax]);
        for (const auto& w : layout_.walls) {
            // Wall perpendicular to the motion axis sits at a fixed coordinate.
            const bool perpendicular = (axis == 0) ? w.vertical() : w.horizontal();
            if (perpendicular) {
                const double at = (axis == 0) ? w.x0 : w.y0;
                const double s0 = (axis == 0) ? std::min(w.y0, w.y1) : std::min(w.x0, w.x1);
                const double s1 = (axis == 0) ? std::max(w.y0, w.y1) : std::max(w.x0, w.x1);
                if (a[ot] >= s0 && a[ot] <= s1 && at >= lo && at <= hi) return true;
            } else {
                // Parallel wall: only blocks when sliding exactly along it.
                const double at = (axis == 0) ? w.y0 : w.x0;
                const double s0 = (axis == 0) ? std::min(w.x0, w.x1) : std::min(w.y0, w.y1);
                const double s1 = (axis == 0) ? std::max(w.x0, w.x1) : std::max(w.y0, w.y1);
                if (a[ot] == at && hi >= s0 && lo <= s1) return true;
            }
        }
        return false;
    }

    bool in_goal() const {
        const double dx = pos_[0] - layout_.goal[0];
        const double dy = pos_[1] - layout_.goal[1];
        return dx * dx + dy * dy <= layout_.goal_radius * layout_.goal_radius;
    }

    MazeLayout layout_;
    std::array<double, 2> pos_{};
    detail::EpisodeClock clock_;
};

inline std::unique_ptr<Environment> make_env(const std::string& name, const MazeLayout& maze = MazeLayout::s_corridor()) {
    if (name == "pendulum") return std::make_unique<Pendulum>();
    if (name == "pointmaze") return std::make_unique<PointMaze>(maze);
    throw std::invalid_argument("unknown environment '" + name + "' (expected pendulum or pointmaze)");
}

}  // namespace ccep
