#include "hitctl/certificate.hpp"
#include "hitctl/errors.hpp"
#include "hitctl/fishery.hpp"
#include "hitctl/policy.hpp"
#include "hitctl/simulator.hpp"
#include "hitctl/solver.hpp"
#include "support/random_models.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hitctl;

namespace {

const StationaryPolicy kFisheryOptimal{{fishery::kImport, fishery::kImportLess, fishery::kDoNothing}};

SimulationConfig config(std::size_t runs, std::uint64_t seed, StateIndex start, std::size_t max_steps = kDefaultMaxSteps) {
    SimulationConfig c;
    c.runs = runs;
    c.master_seed = seed;
    c.initial_state = start;
    c.max_steps = max_steps;
    return c;
}

} // namespace

TEST(Trajectory, StartInTargetHitsAtZero) {
    const auto m = fishery::model();
    const auto rec = sample_trajectory(m, kFisheryOptimal, 1, 0, 100, fishery::kTargetLevel);
    EXPECT_EQ(rec.hitting_time, 0u);
    EXPECT_EQ(rec.discounted_cost, 0.0);
    EXPECT_EQ(rec.states, (std::vector<StateIndex>{fishery::kTargetLevel}));
    EXPECT_TRUE(rec.actions.empty());
}

TEST(Trajectory, PathIsConsistent) {
    const auto m = fishery::model();
    const auto rec = sample_trajectory(m, kFisheryOptimal, 3, 9, 1000, 0);
    ASSERT_TRUE(rec.hitting_time.has_value());
    EXPECT_EQ(rec.states.size(), *rec.hitting_time + 1);
    EXPECT_EQ(rec.actions.size(), *rec.hitting_time);
    double cost = 0.0, d = 1.0;
    for (std::size_t i = 0; i < rec.actions.size(); ++i) {
        EXPECT_FALSE(m.is_target(rec.states[i]));
        EXPECT_EQ(rec.actions[i], kFisheryOptimal[rec.states[i]]);
        const auto& row = m.actions(rec.states[i])[rec.actions[i]].transition;
        EXPECT_GT(row[rec.states[i + 1]], 0.0);
        cost += d * m.actions(rec.states[i])[rec.actions[i]].cost;
        d *= 0.9;
    }
    EXPECT_TRUE(m.is_target(rec.states.back()));
    EXPECT_NEAR(rec.discounted_cost, cost, 1e-9);
}

TEST(Trajectory, DeterministicPerSeedAndRun) {
    const auto m = fishery::model();
    const auto a = sample_trajectory(m, kFisheryOptimal, 42, 7, 1000, 0);
    const auto b = sample_trajectory(m, kFisheryOptimal, 42, 7, 1000, 0);
    EXPECT_EQ(a.states, b.states);
    EXPECT_EQ(a.discounted_cost, b.discounted_cost);
    bool differs = false;
    for (std::uint64_t r = 0; r < 20 && !differs; ++r)
        differs = sample_trajectory(m, kFisheryOptimal, 42, r, 1000, 0).states != a.states;
    EXPECT_TRUE(differs);
}

TEST(Trajectory, HarvestForeverIsCensored) {
    const auto m = fishery::model();
    const auto rec = sample_trajectory(m, StationaryPolicy{{0, 0, 0}}, 1, 0, 50, 0);
    EXPECT_TRUE(rec.censored());
    EXPECT_EQ(rec.states.size(), 51u);
    EXPECT_NEAR(rec.discounted_cost, 280.0 * (1 - std::pow(0.9, 50)) / 0.1, 1e-9);
}

TEST(Trajectory, UndefinedPolicyThrows) {
    const auto m = fishery::model();
    // Harvesting keeps level 1 in place, so the gaps are never visited.
    TotalPolicy partial{{0, std::nullopt, std::nullopt, std::nullopt}};
    EXPECT_THROW((void)sample_trajectory(m, TotalPolicy{{3, std::nullopt, std::nullopt, std::nullopt}}, 1, 0,
                                         1000, 0),
                 PolicyUndefined);
    EXPECT_NO_THROW((void)sample_trajectory(m, partial, 1, 0, 10, 0));
}

TEST(RunEngine, PureFunctionOfSeedAndRun) {
    auto a = run_engine(5, 6);
    auto b = run_engine(5, 6);
    auto c = run_engine(5, 7);
    auto d = run_engine(6, 6);
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
    EXPECT_NE(x, d());
}

TEST(MonteCarlo, OptimalPolicyMatchesExactValue) {
    const auto m = fishery::model();
    const auto exact = evaluate_policy(m, kFisheryOptimal).value[0];
    const auto s = monte_carlo(m, kFisheryOptimal, config(10000, 1, 0));
    EXPECT_EQ(s.censored_count, 0u);
    EXPECT_LE(std::abs(s.cost_mean - exact), 3 * s.cost_stderr);
    EXPECT_NEAR(s.cost_stderr, s.cost_stddev / 100.0, 1e-12);
}

TEST(MonteCarlo, IndicatorCostMatchesDssp) {
    const auto m = fishery::model();
    const auto unit = with_unit_costs(m);
    const auto s = monte_carlo(unit, kFisheryOptimal, config(10000, 2, 0));
    EXPECT_LE(std::abs(s.cost_mean - dssp_value(m, kFisheryOptimal, 0)), 4 * s.cost_stderr);
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResults) {
    const auto m = fishery::model();
    auto c = config(3000, 9, 1);
    const auto one = monte_carlo(m, kFisheryOptimal, c);
    c.threads = 4;
    const auto four = monte_carlo(m, kFisheryOptimal, c);
    EXPECT_EQ(one, four);
}

TEST(MonteCarlo, RepeatedSeedIsBitIdentical) {
    const auto m = fishery::model();
    EXPECT_EQ(monte_carlo(m, kFisheryOptimal, config(500, 77, 0)), monte_carlo(m, kFisheryOptimal, config(500, 77, 0)));
}

TEST(MonteCarlo, SingleRunIsDegenerate) {
    const auto s = monte_carlo(fishery::model(), kFisheryOptimal, config(1, 3, 0));
    EXPECT_TRUE(s.degenerate);
    EXPECT_EQ(s.cost_stddev, 0.0);
    EXPECT_EQ(s.cost_stderr, 0.0);
}

TEST(MonteCarlo, AllCensoredHasNoHittingStatistics) {
    const auto s = monte_carlo(fishery::model(), StationaryPolicy{{0, 0, 0}}, config(20, 3, 0, 100));
    EXPECT_EQ(s.censored_count, 20u);
    EXPECT_FALSE(s.hitting_time_mean.has_value());
}

TEST(MonteCarlo, RejectsBadConfig) {
    const auto m = fishery::model();
    EXPECT_THROW((void)monte_carlo(m, kFisheryOptimal, config(0, 1, 0)), std::invalid_argument);
    EXPECT_THROW((void)monte_carlo(m, kFisheryOptimal, config(5, 1, 9)), std::invalid_argument);
}

TEST(MonteCarlo, RandomModelsAgreeWithEvaluation) {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 5; ++trial) {
        const auto m = test_support::random_model(rng, 0.9);
        const auto f = brute_force_optimal(m).policy;
        const auto exact = evaluate_policy(m, f).value;
        const auto s = monte_carlo(m, f, config(4000, 10 + trial, 0, 1000));
        EXPECT_LE(std::abs(s.cost_mean - exact[0]), 4 * s.cost_stderr + 1e-9);
    }
}

TEST(Recovery, FisheryExitRowWithinHalfWidth) {
    const auto m = fishery::recovery_model();
    ValueIterationOptions opt;
    opt.tolerance = 1e-10;
    const auto v_star = value_iteration(m, opt, make_weight_certificate(m)).value;
    const auto b = recovery_bounds(m, v_star);
    const auto est = estimate_recovery_cost(m, concatenate_recovery(m, kFisheryOptimal),
                                            config(100, 5, fishery::kTargetLevel), 1000);
    EXPECT_EQ(est.excursions_per_run, 1001u);
    EXPECT_EQ(est.shortfall, 0u);
    EXPECT_GT(est.half_width, 0.0);
    EXPECT_GE(est.estimate, b.beta_lower - est.half_width);
    EXPECT_LE(est.estimate, b.beta_upper + est.half_width);
}

TEST(Recovery, RowWithTargetMassTracksConditionedValue) {
    // With mass 0.4 staying in K the excursion starts from the exit
    // distribution, so the estimate follows the conditioned value, which is
    // beta / 0.6, well above the unconditioned beta.
    const auto m = with_target_dynamics(fishery::model(), {TargetAction{"synthetic", {0.1, 0.2, 0.3, 0.4}}});
    ValueIterationOptions opt;
    opt.tolerance = 1e-10;
    const auto v_star = value_iteration(m, opt, make_weight_certificate(m)).value;
    const auto plain = recovery_bounds(m, v_star);
    const auto cond = exit_conditioned_bounds(m, v_star);
    ASSERT_TRUE(cond.has_value());
    const auto est = estimate_recovery_cost(m, concatenate_recovery(m, kFisheryOptimal),
                                            config(100, 6, fishery::kTargetLevel), 1000);
    EXPECT_NEAR(est.estimate, cond->beta_lower, est.half_width);
    EXPECT_GT(est.estimate, plain.beta_upper + est.half_width);
}

TEST(Recovery, NeverLeavingTargetIsShortfall) {
    const auto m = with_target_dynamics(fishery::model(), {TargetAction{"stay", {0, 0, 0, 1}}});
    const auto est = estimate_recovery_cost(m, concatenate_recovery(m, kFisheryOptimal),
                                            config(3, 1, fishery::kTargetLevel, 50), 10);
    EXPECT_EQ(est.estimate, 0.0);
    EXPECT_EQ(est.shortfall, 33u);
}

TEST(Recovery, StalledExcursionThrows) {
    const auto m = fishery::recovery_model();
    const auto harvest = concatenate_recovery(m, StationaryPolicy{{0, 0, 0}});
    EXPECT_THROW((void)estimate_recovery_cost(m, harvest, config(2, 1, 0, 100), 5), ExcursionStalled);
}

TEST(Recovery, RequiresTargetDynamics) {
    const auto m = fishery::model();
    EXPECT_THROW((void)estimate_recovery_cost(m, stopped_policy(m, kFisheryOptimal), config(2, 1, 3), 5),
                 MissingTargetDynamics);
}

TEST(Recovery, SingleRunUsesWithinRunSpread) {
    const auto m = fishery::recovery_model();
    const auto est = estimate_recovery_cost(m, concatenate_recovery(m, kFisheryOptimal),
                                            config(1, 8, fishery::kTargetLevel), 200);
    EXPECT_EQ(est.runs, 1u);
    EXPECT_GT(est.half_width, 0.0);
}
