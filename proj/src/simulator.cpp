#include "hitctl/simulator.hpp"

#include "hitctl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

namespace hitctl {

namespace {

constexpr double kNormalQuantile95 = 1.959963984540054;

/// Per-state sampling data for one total policy: the chosen row's cumulative
/// sums and the stage cost (0 on K).
struct StepTable {
    struct Entry {
        bool defined = false;
        std::size_t action = 0;
        double cost = 0.0;
        std::vector<double> cumulative;
    };
    std::vector<Entry> entries;
};

StepTable build_table(const MarkovControlModel& model, const TotalPolicy& policy) {
    if (policy.actions.size() != model.state_count())
        throw std::invalid_argument("total policy must cover every state");
    StepTable table;
    table.entries.resize(model.state_count());
    for (StateIndex s = 0; s < model.state_count(); ++s) {
        const auto& choice = policy.actions[s];
        if (!choice) continue;
        auto& e = table.entries[s];
        const std::vector<double>* row = nullptr;
        if (model.is_target(s)) {
            row = &model.target_action(s).transition;
        } else {
            if (*choice >= model.actions(s).size())
                throw InfeasibleAction("action " + std::to_string(*choice) + " is not feasible in state " +
                                       model.state_name(s));
            row = &model.actions(s)[*choice].transition;
            e.cost = model.actions(s)[*choice].cost;
        }
        e.defined = true;
        e.action = *choice;
        e.cumulative.resize(row->size());
        double acc = 0.0;
        for (std::size_t y = 0; y < row->size(); ++y) e.cumulative[y] = acc += (*row)[y];
    }
    return table;
}

double uniform01(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

StateIndex draw(const StepTable::Entry& entry, std::mt19937_64& engine) {
    const double u = uniform01(engine) * entry.cumulative.back();
    auto it = std::upper_bound(entry.cumulative.begin(), entry.cumulative.end(), u);
    const auto idx = static_cast<std::size_t>(it - entry.cumulative.begin());
    return std::min(idx, entry.cumulative.size() - 1);
}

const StepTable::Entry& require_defined(const MarkovControlModel& model, const StepTable& table, StateIndex s) {
    const auto& e = table.entries[s];
    if (!e.defined) throw PolicyUndefined("policy has no action in state " + model.state_name(s));
    return e;
}

TrajectoryRecord walk(const MarkovControlModel& model, const StepTable& table, std::mt19937_64& engine,
                      std::size_t max_steps, StateIndex initial_state, bool record_path) {
    if (initial_state >= model.state_count()) throw std::invalid_argument("initial state out of range");
    TrajectoryRecord rec;
    StateIndex x = initial_state;
    double discount_factor = 1.0;
    if (record_path) rec.states.push_back(x);
    for (std::size_t i = 0;; ++i) {
        if (model.is_target(x)) {
            rec.hitting_time = i;
            break;
        }
        if (i == max_steps) break;
        const auto& e = require_defined(model, table, x);
        rec.discounted_cost += discount_factor * e.cost;
        discount_factor *= model.discount();
        x = draw(e, engine);
        if (record_path) {
            rec.actions.push_back(e.action);
            rec.states.push_back(x);
        }
    }
    return rec;
}

/// Runs `body(run_index)` for every run, split into contiguous blocks.
void for_each_run(std::size_t runs, std::size_t threads, const std::function<void(std::size_t)>& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, runs);
    if (threads <= 1) {
        for (std::size_t r = 0; r < runs; ++r) body(r);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> workers;
    const std::size_t block = (runs + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        workers.emplace_back([&, t] {
            try {
                for (std::size_t r = t * block; r < std::min(runs, (t + 1) * block); ++r) body(r);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd out;
    if (xs.empty()) return out;
    double sum = 0.0;
    for (double x : xs) sum += x;
    out.mean = sum / static_cast<double>(xs.size());
    if (xs.size() < 2) return out;
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    return out;
}

void check_config(const SimulationConfig& config, const MarkovControlModel& model) {
    if (config.runs < 1) throw std::invalid_argument("runs must be at least 1");
    if (config.max_steps < 1) throw std::invalid_argument("max_steps must be at least 1");
    if (config.initial_state >= model.state_count()) throw std::invalid_argument("initial state out of range");
}

} // namespace

std::mt19937_64 run_engine(std::uint64_t master_seed, std::uint64_t run_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(run_index), static_cast<std::uint32_t>(run_index >> 32)};
    return std::mt19937_64(seq);
}

TrajectoryRecord sample_trajectory(const MarkovControlModel& model, const TotalPolicy& policy,
                                   std::uint64_t master_seed, std::uint64_t run_index, std::size_t max_steps,
                                   StateIndex initial_state) {
    const StepTable table = build_table(model, policy);
    auto engine = run_engine(master_seed, run_index);
    return walk(model, table, engine, max_steps, initial_state, true);
}

TrajectoryRecord sample_trajectory(const MarkovControlModel& model, const StationaryPolicy& policy,
                                   std::uint64_t master_seed, std::uint64_t run_index, std::size_t max_steps,
                                   StateIndex initial_state) {
    return sample_trajectory(model, stopped_policy(model, policy), master_seed, run_index, max_steps, initial_state);
}

MonteCarloSummary monte_carlo(const MarkovControlModel& model, const TotalPolicy& policy,
                              const SimulationConfig& config) {
    check_config(config, model);
    const StepTable table = build_table(model, policy);

    std::vector<double> costs(config.runs);
    std::vector<std::optional<std::size_t>> times(config.runs);
    for_each_run(config.runs, config.threads, [&](std::size_t r) {
        auto engine = run_engine(config.master_seed, r);
        const auto rec = walk(model, table, engine, config.max_steps, config.initial_state, false);
        costs[r] = rec.discounted_cost;
        times[r] = rec.hitting_time;
    });

    MonteCarloSummary out;
    out.runs = config.runs;
    out.degenerate = config.runs == 1;
    const MeanStd cost = mean_std(costs);
    out.cost_mean = cost.mean;
    out.cost_stddev = cost.stddev;
    out.cost_stderr = cost.stddev / std::sqrt(static_cast<double>(config.runs));

    std::vector<double> hit;
    for (const auto& t : times) {
        if (t) hit.push_back(static_cast<double>(*t));
        else ++out.censored_count;
    }
    if (!hit.empty()) {
        const MeanStd h = mean_std(hit);
        out.hitting_time_mean = h.mean;
        out.hitting_time_stddev = h.stddev;
    }
    return out;
}

MonteCarloSummary monte_carlo(const MarkovControlModel& model, const StationaryPolicy& policy,
                              const SimulationConfig& config) {
    return monte_carlo(model, stopped_policy(model, policy), config);
}

RecoveryEstimate estimate_recovery_cost(const MarkovControlModel& model, const TotalPolicy& total_policy,
                                        const SimulationConfig& config, std::size_t excursion_count) {
    if (!model.has_target_dynamics()) throw MissingTargetDynamics("recovery estimation needs in-target dynamics");
    if (excursion_count < 1) throw std::invalid_argument("excursion count must be at least 1");
    check_config(config, model);
    const StepTable table = build_table(model, total_policy);
    const std::size_t summands = excursion_count + 1;

    struct RunResult {
        double average = 0.0;
        std::size_t shortfall = 0;
        std::vector<double> excursion_costs;
    };
    std::vector<RunResult> results(config.runs);

    for_each_run(config.runs, config.threads, [&](std::size_t r) {
        auto engine = run_engine(config.master_seed, r);
        RunResult& out = results[r];
        StateIndex x = config.initial_state;

        // Stay in K under g* until the first exit; false when no exit happens.
        auto leave_target = [&] {
            for (std::size_t steps = 0; model.is_target(x); ++steps) {
                if (steps == config.max_steps) return false;
                x = draw(require_defined(model, table, x), engine);
            }
            return true;
        };

        double total = 0.0;
        std::size_t done = 0;
        if (leave_target()) {
            while (done < summands) {
                double cost = 0.0;
                double discount_factor = 1.0;
                for (std::size_t steps = 0; !model.is_target(x); ++steps) {
                    if (steps == config.max_steps)
                        throw ExcursionStalled("excursion from run " + std::to_string(r) +
                                               " did not reach the target set within " +
                                               std::to_string(config.max_steps) + " steps");
                    const auto& e = require_defined(model, table, x);
                    cost += discount_factor * e.cost;
                    discount_factor *= model.discount();
                    x = draw(e, engine);
                }
                total += cost;
                out.excursion_costs.push_back(cost);
                if (++done == summands || !leave_target()) break;
            }
        }
        out.shortfall = summands - done;
        out.average = total / static_cast<double>(summands);
    });

    RecoveryEstimate est;
    est.runs = config.runs;
    est.excursions_per_run = summands;
    std::vector<double> averages;
    averages.reserve(results.size());
    for (const auto& res : results) {
        averages.push_back(res.average);
        est.shortfall += res.shortfall;
    }
    const MeanStd across = mean_std(averages);
    est.estimate = across.mean;
    if (config.runs >= 2) {
        est.half_width = kNormalQuantile95 * across.stddev / std::sqrt(static_cast<double>(config.runs));
    } else {
        const auto& xs = results.front().excursion_costs;
        const MeanStd within = mean_std(xs);
        est.half_width = xs.empty() ? 0.0 : kNormalQuantile95 * within.stddev / std::sqrt(static_cast<double>(summands));
    }
    return est;
}

} // namespace hitctl
