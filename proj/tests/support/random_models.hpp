#pragma once

// Test-only generators and oracles that do not go through the library's
// solver code paths.

#include "hitctl/model.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace hitctl::test_support {

struct RandomModelShape {
    std::size_t min_free = 3;
    std::size_t max_free = 5;
    std::size_t min_actions = 2;
    std::size_t max_actions = 3;
    std::size_t targets = 1;
    double max_cost = 10.0;
};

inline std::size_t uniform_count(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Random row over `n` states whose mass on the target states (the last
/// `targets` indices) is a random sub-unit amount, sometimes exactly 0.
inline std::vector<double> random_row(std::mt19937_64& rng, std::size_t n, std::size_t targets) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);
    const double exit_mass = unit(rng) < 0.2 ? 0.0 : 0.9 * unit(rng);
    std::vector<double> row(n, 0.0);
    double free_total = 0.0;
    for (std::size_t y = 0; y + targets < n; ++y) free_total += row[y] = expo(rng);
    for (std::size_t y = 0; y + targets < n; ++y) row[y] *= (1.0 - exit_mass) / free_total;
    double target_total = 0.0;
    std::vector<double> split(targets);
    for (auto& s : split) target_total += s = expo(rng);
    for (std::size_t k = 0; k < targets; ++k) row[n - targets + k] = exit_mass * split[k] / target_total;
    renormalize_row(row);
    return row;
}

/// Non-target states first, targets last.
inline MarkovControlModel random_model(std::mt19937_64& rng, double discount, const RandomModelShape& shape = {}) {
    const std::size_t free = uniform_count(rng, shape.min_free, shape.max_free);
    const std::size_t n = free + shape.targets;
    std::uniform_real_distribution<double> cost(0.0, shape.max_cost);
    std::vector<std::vector<Action>> actions(n);
    for (std::size_t x = 0; x < free; ++x) {
        const std::size_t k = uniform_count(rng, shape.min_actions, shape.max_actions);
        for (std::size_t a = 0; a < k; ++a)
            actions[x].push_back(Action{"a" + std::to_string(a), random_row(rng, n, shape.targets), cost(rng)});
    }
    std::vector<StateIndex> target;
    for (std::size_t k = 0; k < shape.targets; ++k) target.push_back(free + k);
    return MarkovControlModel(n, target, std::move(actions), discount);
}

/// sum_k (discount * Q_f)^k c_f, truncated once the remaining tail is below
/// 1e-14 relative: a route to V(f, .) that avoids any linear solve.
inline std::vector<double> series_value(const MarkovControlModel& model, const StationaryPolicy& policy,
                                        const std::vector<double>& costs) {
    const std::size_t m = model.nontarget_count();
    std::vector<double> term = costs;
    std::vector<double> total(m, 0.0);
    double c_max = 0.0;
    for (double c : costs) c_max = std::max(c_max, c);
    for (std::size_t k = 0; k < 100000; ++k) {
        double term_max = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            total[i] += term[i];
            term_max = std::max(term_max, std::abs(term[i]));
        }
        if (term_max / (1.0 - model.discount()) <= 1e-14 * std::max(1.0, c_max)) break;
        std::vector<double> next(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const StateIndex s = model.state_at(i);
            const auto& row = model.actions(s)[policy[i]].transition;
            for (StateIndex y = 0; y < model.state_count(); ++y)
                if (const auto pos = model.position(y)) next[i] += model.discount() * row[y] * term[*pos];
        }
        term = std::move(next);
    }
    return total;
}

inline std::vector<double> policy_costs(const MarkovControlModel& model, const StationaryPolicy& policy) {
    std::vector<double> c;
    for (std::size_t i = 0; i < policy.size(); ++i) c.push_back(model.actions(model.state_at(i))[policy[i]].cost);
    return c;
}

/// One-non-target-state model: state 0 stays with probability `stay`,
/// otherwise moves to target state 1; a single action with cost `cost`.
inline MarkovControlModel single_state_model(double discount, double stay, double cost = 1.0) {
    std::vector<std::vector<Action>> actions(2);
    actions[0].push_back(Action{"only", {stay, 1.0 - stay}, cost});
    return MarkovControlModel(2, {1}, std::move(actions), discount, {"out", "in"});
}

} // namespace hitctl::test_support
