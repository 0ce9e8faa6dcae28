#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "regmdp/mdp.hpp"
#include "regmdp/rng.hpp"

namespace regmdp {

/// Four-action grid with rewarded corner cells and slip dynamics.
///
/// The agent's attempted move succeeds with probability 1 - slip_probability;
/// otherwise the executed action is drawn uniformly from all four actions
/// (so the attempted one may still occur by chance). Setting
/// slip_excludes_attempted draws uniformly from the other three instead.
/// Moves off the boundary keep the agent in place. The MDP is continuing:
/// rewarded corners are not terminal.
struct GridWorldConfig {
    int width = 5;
    int height = 5;
    double reward_top_right = 1.0;
    double reward_bottom_left = 1.0;
    double reward_bottom_right = 2.0;
    double slip_probability = 0.1;
    bool slip_excludes_attempted = false;
    double discount = 0.99;
};

namespace gridworld {

enum Action { kNorth = 0, kSouth = 1, kWest = 2, kEast = 3 };
inline constexpr int kNumActions = 4;

inline int cell_index(const GridWorldConfig& c, int row, int col) {
    return row * c.width + col;
}

/// Destination of an executed action; stays in place at boundaries.
inline int destination(const GridWorldConfig& c, int state, int action) {
    const int row = state / c.width;
    const int col = state % c.width;
    int r2 = row, c2 = col;
    switch (action) {
        case kNorth: r2 = row - 1; break;
        case kSouth: r2 = row + 1; break;
        case kWest: c2 = col - 1; break;
        case kEast: c2 = col + 1; break;
    }
    if (r2 < 0 || r2 >= c.height || c2 < 0 || c2 >= c.width) return state;
    return cell_index(c, r2, c2);
}

inline double cell_reward(const GridWorldConfig& c, int state) {
    if (state == cell_index(c, 0, c.width - 1)) return c.reward_top_right;
    if (state == cell_index(c, c.height - 1, 0)) return c.reward_bottom_left;
    if (state == cell_index(c, c.height - 1, c.width - 1)) return c.reward_bottom_right;
    return 0.0;
}

}  // namespace gridworld

/// Builds the grid world MDP. R(s,a) is the expected destination-cell
/// reward under the slip dynamics, keeping the reward a plain (s,a) table.
inline TabularMdp build_gridworld(const GridWorldConfig& config) {
    if (config.width <= 0 || config.height <= 0)
        throw std::invalid_argument("build_gridworld: grid must have positive width and height");
    if (config.slip_probability < 0.0 || config.slip_probability > 1.0)
        throw std::invalid_argument("build_gridworld: slip_probability must lie in [0, 1]");
    if (!(config.discount > 0.0) || !(config.discount < 1.0))
        throw std::invalid_argument("build_gridworld: discount must lie in (0, 1)");

    using namespace gridworld;
    const int S = config.width * config.height;
    TabularMdp mdp;
    mdp.num_states = S;
    mdp.num_actions = kNumActions;
    mdp.discount = config.discount;
    mdp.transition.assign(static_cast<std::size_t>(S) * kNumActions * S, 0.0);
    mdp.reward = QTable(S, kNumActions);

    const double slip = config.slip_probability;
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < kNumActions; ++a) {
            if (config.slip_excludes_attempted) {
                mdp.p(s, a, destination(config, s, a)) += 1.0 - slip;
                for (int b = 0; b < kNumActions; ++b) {
                    if (b == a) continue;
                    mdp.p(s, a, destination(config, s, b)) += slip / 3.0;
                }
            } else {
                mdp.p(s, a, destination(config, s, a)) += 1.0 - slip;
                for (int b = 0; b < kNumActions; ++b)
                    mdp.p(s, a, destination(config, s, b)) += slip / 4.0;
            }
            double r = 0.0;
            for (int s2 = 0; s2 < S; ++s2) r += mdp.p(s, a, s2) * cell_reward(config, s2);
            mdp.reward(s, a) = r;
        }
    }
    mdp.r_max = std::max({std::abs(config.reward_top_right), std::abs(config.reward_bottom_left),
                          std::abs(config.reward_bottom_right), 0.0});
    validate_mdp(mdp);
    return mdp;
}

/// Seeded random MDP: transition rows sampled uniformly then normalized,
/// rewards uniform in [-reward_scale, reward_scale]. Identical seeds give
/// bit-identical MDPs.
inline TabularMdp build_random_mdp(int num_states, int num_actions, std::uint64_t seed,
                                   double reward_scale = 1.0, double discount = 0.9) {
    if (num_states <= 0 || num_actions <= 0)
        throw std::invalid_argument("build_random_mdp: sizes must be positive");
    if (!(discount > 0.0) || !(discount < 1.0))
        throw std::invalid_argument("build_random_mdp: discount must lie in (0, 1)");
    Rng rng(mix_seed(seed, 0x6d64705f72616e64ULL));
    TabularMdp mdp;
    mdp.num_states = num_states;
    mdp.num_actions = num_actions;
    mdp.discount = discount;
    mdp.transition.resize(static_cast<std::size_t>(num_states) * num_actions * num_states);
    mdp.reward = QTable(num_states, num_actions);
    for (int s = 0; s < num_states; ++s) {
        for (int a = 0; a < num_actions; ++a) {
            double sum = 0.0;
            for (int s2 = 0; s2 < num_states; ++s2) {
                const double w = rng.uniform();
                mdp.p(s, a, s2) = w;
                sum += w;
            }
            if (sum <= 0.0) {  // astronomically unlikely; keep the row valid
                mdp.p(s, a, s % num_states) = 1.0;
                sum = 1.0;
            }
            for (int s2 = 0; s2 < num_states; ++s2) mdp.p(s, a, s2) /= sum;
            mdp.reward(s, a) = rng.uniform(-reward_scale, reward_scale);
        }
    }
    mdp.r_max = std::abs(reward_scale);
    validate_mdp(mdp);
    return mdp;
}

}  // namespace regmdp
