#pragma once

#include "hitctl/model.hpp"
#include "hitctl/policy.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace hitctl {

inline constexpr std::size_t kDefaultMaxSteps = 100000;

struct SimulationConfig {
    std::size_t runs = 1;
    std::size_t max_steps = kDefaultMaxSteps;
    std::uint64_t master_seed = 0;
    StateIndex initial_state = 0;
    /// Worker threads; 0 picks std::thread::hardware_concurrency(). Results do
    /// not depend on this value.
    std::size_t threads = 1;
};

/// Engine of run `run_index` under `master_seed`; a pure function of the pair.
std::mt19937_64 run_engine(std::uint64_t master_seed, std::uint64_t run_index);

struct TrajectoryRecord {
    std::vector<StateIndex> states;
    std::vector<std::size_t> actions;
    /// First index in K; nullopt when censored at max_steps.
    std::optional<std::size_t> hitting_time;
    /// sum_{i < min(tau, max_steps)} discount^i c(x_i, a_i).
    double discounted_cost = 0.0;

    bool censored() const noexcept { return !hitting_time.has_value(); }
};

/// One path from `initial_state` under `policy`, stopped at K or after
/// max_steps transitions. Throws PolicyUndefined when the walk reaches a
/// non-target state the policy does not cover.
TrajectoryRecord sample_trajectory(const MarkovControlModel& model, const TotalPolicy& policy,
                                   std::uint64_t master_seed, std::uint64_t run_index, std::size_t max_steps,
                                   StateIndex initial_state);

TrajectoryRecord sample_trajectory(const MarkovControlModel& model, const StationaryPolicy& policy,
                                   std::uint64_t master_seed, std::uint64_t run_index, std::size_t max_steps,
                                   StateIndex initial_state);

struct MonteCarloSummary {
    std::size_t runs = 0;
    double cost_mean = 0.0;
    double cost_stddev = 0.0;
    double cost_stderr = 0.0;
    /// Over non-censored runs; nullopt when every run is censored.
    std::optional<double> hitting_time_mean;
    std::optional<double> hitting_time_stddev;
    std::size_t censored_count = 0;
    /// Single-sample estimate (standard deviations reported as 0).
    bool degenerate = false;

    bool operator==(const MonteCarloSummary&) const = default;
};

MonteCarloSummary monte_carlo(const MarkovControlModel& model, const TotalPolicy& policy,
                              const SimulationConfig& config);

MonteCarloSummary monte_carlo(const MarkovControlModel& model, const StationaryPolicy& policy,
                              const SimulationConfig& config);

struct RecoveryEstimate {
    /// Average per-excursion discounted cost, averaged over runs.
    double estimate = 0.0;
    /// 95% normal-approximation half-width.
    double half_width = 0.0;
    std::size_t runs = 0;
    /// Excursions requested per run (n + 1 summands).
    std::size_t excursions_per_run = 0;
    /// Excursions that never started because a sojourn in K did not exit
    /// within max_steps; they contribute 0.
    std::size_t shortfall = 0;
};

/**
Estimates the average discounted cost of recovery by simulating the
concatenated policy through the alternating entry/exit times of K. Each run
sums n + 1 excursion costs, each discounted from its own exit time, and
divides by n + 1. When the initial state lies in K the first excursion
starts at the first exit.

Throws ExcursionStalled when an excursion outside K does not reach K within
max_steps, and MissingTargetDynamics when the model has no in-target rows.
*/
RecoveryEstimate estimate_recovery_cost(const MarkovControlModel& model, const TotalPolicy& total_policy,
                                        const SimulationConfig& config, std::size_t excursion_count);

} // namespace hitctl
