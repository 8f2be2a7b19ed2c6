#pragma once

// Episodic return evaluation, grid-cell exploration coverage and per-style
// coverage divergence.

#include "ccep/agent.hpp"
#include "ccep/envs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace ccep {

class CoverageGrid {
public:
    CoverageGrid(StateBox box, std::size_t resolution) : box_(box), resolution_(resolution) {
        if (resolution == 0) throw std::invalid_argument("CoverageGrid: resolution must be >= 1");
        for (int d = 0; d < 2; ++d)
            if (!(box.hi[static_cast<std::size_t>(d)] > box.lo[static_cast<std::size_t>(d)]))
                throw std::invalid_argument("CoverageGrid: empty bounds");
        cells_.assign(resolution * resolution, 0);
    }

    // Out-of-bounds states land in the nearest edge cell.
    std::size_t cell_of(const std::array<double, 2>& p) const {
        std::size_t idx[2];
        for (std::size_t d = 0; d < 2; ++d) {
            const double u = (p[d] - box_.lo[d]) / (box_.hi[d] - box_.lo[d]);
            const double scaled = std::floor(u * static_cast<double>(resolution_));
            idx[d] = static_cast<std::size_t>(std::clamp(scaled, 0.0, static_cast<double>(resolution_ - 1)));
        }
        return idx[1] * resolution_ + idx[0];
    }

    std::array<double, 2> cell_center(std::size_t cell) const {
        const std::size_t ix = cell % resolution_, iy = cell / resolution_;
        const double g = static_cast<double>(resolution_);
        return {box_.lo[0] + (static_cast<double>(ix) + 0.5) * (box_.hi[0] - box_.lo[0]) / g,
                box_.lo[1] + (static_cast<double>(iy) + 0.5) * (box_.hi[1] - box_.lo[1]) / g};
    }

    void record_visit(const std::array<double, 2>& p) {
        auto& c = cells_[cell_of(p)];
        if (!c) {
            c = 1;
            ++visited_;
        }
    }

    double coverage() const { return static_cast<double>(visited_) / static_cast<double>(cells_.size()); }
    std::size_t visited_count() const { return visited_; }
    std::size_t total_cells() const { return cells_.size(); }
    std::size_t resolution() const { return resolution_; }
    bool visited(std::size_t cell) const { return cells_.at(cell) != 0; }
    const StateBox& box() const { return box_; }

    bool same_geometry(const CoverageGrid& o) const {
        return resolution_ == o.resolution_ && box_.lo == o.box_.lo && box_.hi == o.box_.hi;
    }

private:
    StateBox box_;
    std::size_t resolution_;
    std::vector<std::uint8_t> cells_;
    std::size_t visited_ = 0;
};

struct DivergenceReport {
    std::vector<std::size_t> unique_cells;      // cells visited by that style alone
    std::vector<std::vector<double>> jaccard;   // pairwise |A & B| / |A | B|
    std::size_t union_cells = 0;
};

inline DivergenceReport style_divergence(const std::vector<CoverageGrid>& grids) {
    if (grids.size() < 2) throw std::invalid_argument("style_divergence: need at least two styles");
    for (const auto& g : grids)
        if (!g.same_geometry(grids.front())) throw std::invalid_argument("style_divergence: grid geometry mismatch");
    const std::size_t k = grids.size();
    const std::size_t cells = grids.front().total_cells();
    DivergenceReport r;
    r.unique_cells.assign(k, 0);
    r.jaccard.assign(k, std::vector<double>(k, 1.0));
    for (std::size_t c = 0; c < cells; ++c) {
        std::size_t count = 0, last = 0;
        for (std::size_t j = 0; j < k; ++j)
            if (grids[j].visited(c)) {
                ++count;
                last = j;
            }
        if (count > 0) ++r.union_cells;
        if (count == 1) ++r.unique_cells[last];
    }
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            std::size_t inter = 0, uni = 0;
            for (std::size_t c = 0; c < cells; ++c) {
                const bool x = grids[a].visited(c), y = grids[b].visited(c);
                inter += (x && y);
                uni += (x || y);
            }
            const double j = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
            r.jaccard[a][b] = r.jaccard[b][a] = j;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Evaluation

enum class EvalMode { per_style, mixture };

inline EvalMode parse_eval_mode(const std::string& s) {
    if (s == "mixture") return EvalMode::mixture;
    if (s == "per-style") return EvalMode::per_style;
    throw std::invalid_argument("unknown eval mode '" + s + "' (expected mixture or per-style)");
}

inline std::string to_string(EvalMode m) { return m == EvalMode::mixture ? "mixture" : "per-style"; }

struct EvalReport {
    std::vector<double> style_returns;  // mean per style; NaN when a style ran no episode
    std::vector<int> episode_styles;
    std::vector<double> returns;
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
    std::size_t episodes = 0;
};

// Noiseless rollouts of `policy(obs, z)`. Per-style mode runs
// max(1, episodes / K) episodes for each style; mixture mode samples z per
// episode. Episode i always resets with the i-th seed of the evaluation
// stream, so both modes see the same start states.
template <typename Policy>
EvalReport evaluate(Policy&& policy, Environment& env, std::size_t episodes, EvalMode mode, std::size_t num_styles,
                    std::uint64_t seed) {
    if (episodes == 0) throw std::invalid_argument("evaluate: episodes must be >= 1");
    if (num_styles == 0) throw std::invalid_argument("evaluate: num_styles must be >= 1");
    Rng episode_rng(derive_seed(seed, 1));
    Rng style_rng(derive_seed(seed, 2));
    std::uniform_int_distribution<int> pick(0, static_cast<int>(num_styles) - 1);

    EvalReport r;
    if (mode == EvalMode::per_style) {
        const std::size_t per = std::max<std::size_t>(1, episodes / num_styles);
        for (std::size_t j = 0; j < num_styles; ++j)
            for (std::size_t e = 0; e < per; ++e) r.episode_styles.push_back(static_cast<int>(j));
    } else {
        for (std::size_t e = 0; e < episodes; ++e) r.episode_styles.push_back(pick(style_rng));
    }

    for (int z : r.episode_styles) {
        std::vector<double> obs = env.reset(episode_rng());
        double total = 0.0;
        for (;;) {
            const std::vector<double> a = policy(std::span<const double>(obs), z);
            StepResult s = env.step(a);
            total += s.reward;
            if (s.done) break;
            obs = std::move(s.next_obs);
        }
        r.returns.push_back(total);
    }

    r.episodes = r.returns.size();
    r.mean = std::accumulate(r.returns.begin(), r.returns.end(), 0.0) / static_cast<double>(r.episodes);
    double sq = 0.0;
    for (double x : r.returns) sq += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(sq / static_cast<double>(r.episodes));

    r.style_returns.assign(num_styles, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t j = 0; j < num_styles; ++j) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t e = 0; e < r.episodes; ++e)
            if (r.episode_styles[e] == static_cast<int>(j)) {
                sum += r.returns[e];
                ++n;
            }
        if (n > 0) r.style_returns[j] = sum / static_cast<double>(n);
    }
    return r;
}

inline EvalReport evaluate(const Agent& agent, Environment& env, std::size_t episodes, EvalMode mode, std::uint64_t seed) {
    return evaluate([&](std::span<const double> obs, int z) { return agent.act(obs, z); }, env, episodes, mode,
                    agent.num_styles(), seed);
}

}  // namespace ccep
