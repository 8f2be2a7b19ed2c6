#pragma once

// Exact tabular dynamic programming for checking the performance-gap bound
//   ||V* - V^{pi_f}||_inf <= 2 ||f - Q*||_inf / (1 - gamma)
// on small explicit MDPs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace ccep::tabular {

using QTable = std::vector<std::vector<double>>;  // [state][action]
using Policy = std::vector<std::size_t>;          // deterministic action per state

struct TabularMdp {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    std::vector<std::vector<std::vector<double>>> transition;  // P[s][a][s']
    std::vector<std::vector<double>> reward;                   // r[s][a]
    double gamma = 0.9;

    void validate() const {
        if (n_states == 0 || n_actions == 0) throw std::invalid_argument("TabularMdp: empty state or action set");
        if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("TabularMdp: gamma must be in (0, 1)");
        if (transition.size() != n_states || reward.size() != n_states)
            throw std::invalid_argument("TabularMdp: table shape mismatch");
        for (std::size_t s = 0; s < n_states; ++s) {
            if (transition[s].size() != n_actions || reward[s].size() != n_actions)
                throw std::invalid_argument("TabularMdp: table shape mismatch");
            for (std::size_t a = 0; a < n_actions; ++a) {
                if (transition[s][a].size() != n_states) throw std::invalid_argument("TabularMdp: P row length mismatch");
                double sum = 0.0;
                for (double p : transition[s][a]) {
                    if (!(p >= 0.0)) throw std::invalid_argument("TabularMdp: negative transition probability");
                    sum += p;
                }
                if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("TabularMdp: P row does not sum to 1");
                if (!std::isfinite(reward[s][a])) throw std::invalid_argument("TabularMdp: non-finite reward");
            }
        }
    }
};

struct Solution {
    QTable q;
    std::vector<double> v;
    std::size_t iterations = 0;
    std::vector<double> residuals;  // sup-norm change of V per sweep
};

inline double sup_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double sup_norm_diff(const QTable& a, const QTable& b) {
    double m = 0.0;
    for (std::size_t s = 0; s < a.size(); ++s) m = std::max(m, sup_norm_diff(a[s], b[s]));
    return m;
}

inline double backup(const TabularMdp& mdp, std::size_t s, std::size_t a, const std::vector<double>& v) {
    double ev = 0.0;
    for (std::size_t t = 0; t < mdp.n_states; ++t) ev += mdp.transition[s][a][t] * v[t];
    return mdp.reward[s][a] + mdp.gamma * ev;
}

// Iterates the Bellman optimality operator until the sup-norm change drops
// below tol * (1 - gamma) / gamma, which guarantees ||V - V*|| < tol.
inline Solution value_iteration(const TabularMdp& mdp, double tol, std::vector<double> v0 = {}) {
    mdp.validate();
    if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be > 0");
    Solution sol;
    sol.v = v0.empty() ? std::vector<double>(mdp.n_states, 0.0) : std::move(v0);
    if (sol.v.size() != mdp.n_states) throw std::invalid_argument("value_iteration: bad initial values");
    sol.q.assign(mdp.n_states, std::vector<double>(mdp.n_actions, 0.0));
    const double threshold = tol * (1.0 - mdp.gamma) / mdp.gamma;
    for (;;) {
        std::vector<double> next(mdp.n_states);
        for (std::size_t s = 0; s < mdp.n_states; ++s) {
            for (std::size_t a = 0; a < mdp.n_actions; ++a) sol.q[s][a] = backup(mdp, s, a, sol.v);
            next[s] = *std::max_element(sol.q[s].begin(), sol.q[s].end());
        }
        const double residual = sup_norm_diff(next, sol.v);
        sol.residuals.push_back(residual);
        sol.v = std::move(next);
        ++sol.iterations;
        if (residual < threshold) break;
    }
    // Q consistent with the returned V.
    for (std::size_t s = 0; s < mdp.n_states; ++s)
        for (std::size_t a = 0; a < mdp.n_actions; ++a) sol.q[s][a] = backup(mdp, s, a, sol.v);
    return sol;
}

// argmax per row; ties go to the lowest action index.
inline Policy greedy_policy(const QTable& f) {
    Policy pi;
    pi.reserve(f.size());
    for (const auto& row : f) {
        if (row.empty()) throw std::invalid_argument("greedy_policy: empty row");
        pi.push_back(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()));
    }
    return pi;
}

inline std::vector<double> policy_evaluation(const TabularMdp& mdp, const Policy& pi, double tol) {
    mdp.validate();
    if (pi.size() != mdp.n_states) throw std::invalid_argument("policy_evaluation: policy length mismatch");
    for (auto a : pi)
        if (a >= mdp.n_actions) throw std::invalid_argument("policy_evaluation: action out of range");
    std::vector<double> v(mdp.n_states, 0.0);
    const double threshold = tol * (1.0 - mdp.gamma) / mdp.gamma;
    for (;;) {
        std::vector<double> next(mdp.n_states);
        for (std::size_t s = 0; s < mdp.n_states; ++s) next[s] = backup(mdp, s, pi[s], v);
        const double residual = sup_norm_diff(next, v);
        v = std::move(next);
        if (residual < threshold) break;
    }
    return v;
}

struct BoundCheck {
    double lhs = 0.0;  // ||V* - V^{pi_f}||_inf
    double rhs = 0.0;  // 2 ||f - Q*||_inf / (1 - gamma)
    bool holds = false;
};

inline constexpr double iteration_tol = 1e-10;
inline constexpr double bound_slack = 1e-8;

inline BoundCheck check_bound(const TabularMdp& mdp, const QTable& f) {
    const Solution opt = value_iteration(mdp, iteration_tol);
    if (f.size() != mdp.n_states) throw std::invalid_argument("check_bound: f shape mismatch");
    for (const auto& row : f)
        if (row.size() != mdp.n_actions) throw std::invalid_argument("check_bound: f shape mismatch");
    const std::vector<double> v_f = policy_evaluation(mdp, greedy_policy(f), iteration_tol);
    BoundCheck b;
    b.lhs = sup_norm_diff(opt.v, v_f);
    b.rhs = 2.0 * sup_norm_diff(f, opt.q) / (1.0 - mdp.gamma);
    b.holds = b.lhs <= b.rhs + bound_slack;
    return b;
}

// Dirichlet(1, ..., 1) transition rows and U[0, 1] rewards.
template <typename R>
TabularMdp random_mdp(std::size_t n_states, std::size_t n_actions, double gamma, R& rng) {
    TabularMdp m;
    m.n_states = n_states;
    m.n_actions = n_actions;
    m.gamma = gamma;
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    m.transition.assign(n_states, std::vector<std::vector<double>>(n_actions));
    m.reward.assign(n_states, std::vector<double>(n_actions));
    for (std::size_t s = 0; s < n_states; ++s) {
        for (std::size_t a = 0; a < n_actions; ++a) {
            auto& row = m.transition[s][a];
            row.resize(n_states);
            double sum = 0.0;
            for (auto& p : row) sum += (p = expo(rng));
            for (auto& p : row) p /= sum;
            m.reward[s][a] = unit(rng);
        }
    }
    return m;
}

struct LemmaReport {
    std::size_t trials = 0;
    std::size_t holds = 0;
    double max_ratio = 0.0;  // max lhs / rhs over trials with rhs > 0
    bool passed() const { return trials > 0 && holds == trials; }
};

// Random MDPs with 1..max_states states, 1..max_actions actions,
// gamma ~ U[0.5, 0.95] and f = Q* + U[-1, 1] noise per entry.
inline LemmaReport verify_lemma(std::size_t trials, std::uint64_t seed, std::size_t max_states = 10,
                                std::size_t max_actions = 4) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> ns(1, max_states), na(1, max_actions);
    std::uniform_real_distribution<double> gam(0.5, 0.95), noise(-1.0, 1.0);
    LemmaReport rep;
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t n = ns(rng), a = na(rng);
        const double g = gam(rng);
        const TabularMdp mdp = random_mdp(n, a, g, rng);
        QTable f = value_iteration(mdp, iteration_tol).q;
        for (auto& row : f)
            for (auto& x : row) x += noise(rng);
        const BoundCheck b = check_bound(mdp, f);
        ++rep.trials;
        rep.holds += b.holds;
        if (b.rhs > 0.0) rep.max_ratio = std::max(rep.max_ratio, b.lhs / b.rhs);
    }
    return rep;
}

}  // namespace ccep::tabular
