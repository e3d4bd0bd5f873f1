// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails.

#include "hitctl/certificate.hpp"
#include "hitctl/fishery.hpp"
#include "hitctl/model_io.hpp"
#include "hitctl/policy.hpp"
#include "hitctl/simulator.hpp"
#include "hitctl/solver.hpp"
#include "support/random_models.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace hitctl;

namespace {

const StationaryPolicy kFisheryOptimal{{fishery::kImport, fishery::kImportLess, fishery::kDoNothing}};

// Rounding allowance for comparisons of an iterated quantity against the
// dense-solve oracle.
double float_slack(double scale) { return 1e-10 * std::max(1.0, std::abs(scale)); }

struct Outcome {
    bool pass = true;
    std::string detail;
};

MarkovControlModel bundled_fishery() { return load_model(std::string(HITCTL_DATA_DIR) + "/fishery.model"); }

/// Oracle-sized instances: 3-5 non-target states, 2-3 actions, 1-2 targets.
std::vector<MarkovControlModel> random_instances(std::size_t per_discount, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<MarkovControlModel> out;
    for (double alpha : {0.5, 0.9, 0.95})
        for (std::size_t k = 0; k < per_discount; ++k) {
            test_support::RandomModelShape shape;
            shape.targets = 1 + k % 2;
            out.push_back(test_support::random_model(rng, alpha, shape));
        }
    return out;
}

ValueIterationResult solve(const MarkovControlModel& m, double tol) {
    ValueIterationOptions opt;
    opt.tolerance = tol;
    return value_iteration(m, opt, make_weight_certificate(m));
}

SimulationConfig sim_config(std::size_t runs, std::uint64_t seed, StateIndex start, std::size_t max_steps) {
    SimulationConfig c;
    c.runs = runs;
    c.master_seed = seed;
    c.initial_state = start;
    c.max_steps = max_steps;
    return c;
}

Outcome fishery_policy() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = solve(bundled_fishery(), 1e-9);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Outcome o;
    o.pass = r.greedy == kFisheryOptimal && secs < 1.0;
    std::ostringstream ss;
    ss << "selector (" << r.greedy[0] << "," << r.greedy[1] << "," << r.greedy[2] << ") expected (3,4,2) in "
       << secs << " s";
    o.detail = ss.str();
    return o;
}

Outcome oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto models = random_instances(40, 1001);
    double worst_value = 0.0, worst_policy = 0.0;
    for (const auto& m : models) {
        const auto oracle = brute_force_optimal(m);
        const auto r = solve(m, 1e-10);
        const auto greedy = evaluate_policy(m, r.greedy, {EvaluationMethod::exact}).value;
        for (std::size_t i = 0; i < m.nontarget_count(); ++i) {
            worst_value = std::max(worst_value, std::abs(r.value[i] - oracle.value[i]));
            worst_policy = std::max(worst_policy, std::abs(greedy[i] - oracle.value[i]));
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Outcome o;
    o.pass = worst_value <= 1e-8 && worst_policy <= 1e-8 && secs < 30.0;
    std::ostringstream ss;
    ss << models.size() << " models, max |v - V*| = " << worst_value << ", max |V(greedy) - V*| = " << worst_policy
       << " in " << secs << " s";
    o.detail = ss.str();
    return o;
}

Outcome certified_bound() {
    auto models = random_instances(40, 1001);
    models.push_back(bundled_fishery());
    std::size_t checks = 0, violations = 0;
    for (const auto& m : models) {
        const auto cert = make_weight_certificate(m);
        const auto v_star = brute_force_optimal(m).value;
        ValueFunction v{std::vector<double>(m.nontarget_count(), 0.0)};
        for (std::size_t n = 0;; ++n) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double gap = v_star[i] - v[i];
                ++checks;
                if (gap < -float_slack(v_star[i]) ||
                    gap > cert.gap_bound(n) * cert.weight[i] + float_slack(v_star[i]))
                    ++violations;
            }
            if (cert.gap_bound(n) <= 1e-10) break;
            v = bellman_apply(m, v).value;
        }
    }
    std::ostringstream ss;
    ss << violations << " violations in " << checks << " (instance, iterate, state) checks";
    return {violations == 0, ss.str()};
}

Outcome sandwich() {
    auto models = random_instances(20, 2002);
    models.insert(models.begin(), bundled_fishery());
    std::size_t checks = 0, violations = 0;
    for (const auto& m : models) {
        const auto cert = make_weight_certificate(m);
        ValueFunction v{std::vector<double>(m.nontarget_count(), 0.0)};
        for (std::size_t n = 0; n <= 12; ++n) {
            const auto step = bellman_apply(m, v); // v_{n+1} and its argmin
            const auto achieved = evaluate_policy(m, step.selector, {EvaluationMethod::exact}).value;
            const double bound = cert.gap_bound(n + 1);
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double gap = achieved[i] - step.value[i];
                const double slack = 1e-9 * std::max(1.0, std::abs(achieved[i]));
                ++checks;
                if (gap < -slack || gap > bound * cert.weight[i] + slack) ++violations;
            }
            try {
                const auto rh = rolling_horizon(m, n, cert);
                if (rh.stationary_selector != step.selector) ++violations;
            } catch (const std::logic_error&) {
                ++violations;
            }
            v = step.value;
        }
    }
    std::ostringstream ss;
    ss << violations << " violations in " << checks << " checks over " << models.size() << " models, N = 0..12";
    return {violations == 0, ss.str()};
}

Outcome horizon_study() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto m = bundled_fishery();
    const auto cert = make_weight_certificate(m);
    bool late_optimal = true;
    for (std::size_t n = 8; n <= 60; ++n) late_optimal &= rolling_horizon(m, n, cert).stationary_selector == kFisheryOptimal;
    const auto one = rolling_horizon(m, 1, cert).stationary_selector;
    const bool one_differs = one != kFisheryOptimal;
    const bool one_harvests = one[0] == fishery::kHarvest;
    const auto s = monte_carlo(m, one, sim_config(10000, 5, fishery::kAlmostExtinct, 10000));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Outcome o;
    o.pass = late_optimal && one_differs && one_harvests && s.censored_count == 10000 && secs < 60.0;
    std::ostringstream ss;
    ss << "N=8..60 optimal: " << (late_optimal ? "yes" : "no") << ", N=1 differs: " << (one_differs ? "yes" : "no")
       << ", N=1 state-1 harvest: " << (one_harvests ? "yes" : "no") << ", censored " << s.censored_count
       << "/10000 in " << secs << " s";
    o.detail = ss.str();
    return o;
}

Outcome monte_carlo_consistency() {
    const auto m = bundled_fishery();
    const double exact = evaluate_policy(m, kFisheryOptimal, {EvaluationMethod::exact}).value[0];
    const auto s = monte_carlo(m, kFisheryOptimal, sim_config(10000, 6, fishery::kAlmostExtinct, kDefaultMaxSteps));
    const double dssp = dssp_value(m, kFisheryOptimal, fishery::kAlmostExtinct);
    const auto u = monte_carlo(with_unit_costs(m), kFisheryOptimal,
                               sim_config(10000, 6, fishery::kAlmostExtinct, kDefaultMaxSteps));
    const double z_cost = std::abs(s.cost_mean - exact) / s.cost_stderr;
    const double z_dssp = std::abs(u.cost_mean - dssp) / u.cost_stderr;
    std::ostringstream ss;
    ss << "cost mean " << s.cost_mean << " vs exact " << exact << " (" << z_cost << " stderr); indicator mean "
       << u.cost_mean << " vs dssp " << dssp << " (" << z_dssp << " stderr)";
    return {z_cost <= 4.0 && z_dssp <= 4.0 && s.censored_count == 0, ss.str()};
}

/// Three non-target states whose every policy reaches the single target state.
MarkovControlModel singleton_target_model() {
    std::vector<std::vector<Action>> actions(4);
    actions[0] = {Action{"push", {0.3, 0.3, 0.2, 0.2}, 4.0}, Action{"rest", {0.6, 0.3, 0.1, 0.0}, 1.0}};
    actions[1] = {Action{"push", {0.1, 0.3, 0.2, 0.4}, 5.0}, Action{"rest", {0.2, 0.6, 0.2, 0.0}, 2.0}};
    actions[2] = {Action{"push", {0.0, 0.1, 0.3, 0.6}, 3.0}, Action{"rest", {0.1, 0.2, 0.6, 0.1}, 1.0}};
    std::vector<TargetAction> exit{{"leave", {0.5, 0.25, 0.25, 0.0}}};
    return MarkovControlModel(4, {3}, std::move(actions), 0.9, {"a", "b", "c", "k"}, std::move(exit));
}

Outcome recovery_sandwich() {
    std::ostringstream ss;
    bool pass = true;
    const auto check = [&](const std::string& name, const MarkovControlModel& m, std::uint64_t seed) {
        const auto r = solve(m, 1e-10);
        const auto v_star = evaluate_policy(m, r.greedy, {EvaluationMethod::exact}).value;
        const auto b = recovery_bounds(m, v_star);
        const auto est = estimate_recovery_cost(m, concatenate_recovery(m, r.greedy),
                                                sim_config(200, seed, m.target_states().front(), kDefaultMaxSteps),
                                                1000);
        const bool inside = est.estimate >= b.beta_lower - est.half_width &&
                            est.estimate <= b.beta_upper + est.half_width && est.shortfall == 0;
        const bool singleton = m.target_states().size() == 1;
        const bool equal = !singleton || b.beta_lower == b.beta_upper;
        pass &= inside && equal;
        ss << name << ": estimate " << est.estimate << " +/- " << est.half_width << " in [" << b.beta_lower << ", "
           << b.beta_upper << "]; ";
    };
    check("fishery+exit row", with_target_dynamics(bundled_fishery(), {fishery::exit_row()}), 7);
    check("singleton-K model", singleton_target_model(), 8);
    return {pass, ss.str()};
}

Outcome property_suite() {
    std::mt19937_64 rng(3003);
    const auto models = random_instances(10, 3003);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t mono_fail = 0, contraction_fail = 0, nondecreasing_fail = 0, discrepancy_fail = 0,
                residual_fail = 0, determinism_fail = 0;

    // Monotonicity and contraction on 10^3 random pairs, unit and random weights.
    for (std::size_t pair = 0; pair < 1000; ++pair) {
        const auto& m = models[pair % models.size()];
        const std::size_t k = m.nontarget_count();
        WeightCertificate cert = make_weight_certificate(m);
        if (pair % 2) {
            std::vector<double> w(k);
            for (auto& x : w) x = 1.0 + unit(rng);
            try {
                cert = make_weight_certificate(m, w);
            } catch (const CertificateInfeasible&) {
            }
        }
        ValueFunction u{std::vector<double>(k)}, up{std::vector<double>(k)}, other{std::vector<double>(k)};
        for (std::size_t i = 0; i < k; ++i) {
            u[i] = 50.0 * unit(rng);
            up[i] = u[i] + 10.0 * unit(rng);
            other[i] = 50.0 * unit(rng);
        }
        const auto tu = bellman_apply(m, u).value;
        const auto tup = bellman_apply(m, up).value;
        const auto tother = bellman_apply(m, other).value;
        for (std::size_t i = 0; i < k; ++i)
            if (tu[i] > tup[i]) ++mono_fail;
        std::vector<double> d_in(k), d_out(k);
        for (std::size_t i = 0; i < k; ++i) {
            d_in[i] = u[i] - other[i];
            d_out[i] = tu[i] - tother[i];
        }
        const double lhs = weighted_sup_norm(d_out, cert.weight);
        const double rhs = cert.modulus * weighted_sup_norm(d_in, cert.weight);
        if (lhs > rhs + 1e-12 * std::max(1.0, weighted_sup_norm(tu.values))) ++contraction_fail;
    }

    for (const auto& m : models) {
        const auto cert = make_weight_certificate(m);
        const auto v_star = brute_force_optimal(m).value;
        ValueFunction v{std::vector<double>(m.nontarget_count(), 0.0)};
        for (std::size_t n = 0; n <= 50; ++n) {
            const auto step = bellman_apply(m, v);
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (step.value[i] < v[i]) ++nondecreasing_fail;
                if (n >= 1) {
                    const double d = discrepancy(m, v_star, m.state_at(i), step.selector[i]);
                    const double bound = 2.0 * cert.cost_bound * std::pow(cert.modulus, n + 1) /
                                         (1.0 - cert.modulus) * cert.weight[i];
                    if (d < 0.0 || d > bound + float_slack(v_star[i])) ++discrepancy_fail;
                }
            }
            v = step.value;
        }

        const double tol = 1e-8;
        const auto r = solve(m, tol);
        const auto t = bellman_apply(m, r.value).value;
        std::vector<double> diff(t.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = t[i] - r.value[i];
        if (weighted_sup_norm(diff, cert.weight) > 2 * tol) ++residual_fail;
    }

    const auto fish = bundled_fishery();
    for (std::uint64_t seed : {1u, 2u, 99u}) {
        auto c = sim_config(2000, seed, fishery::kAlmostExtinct, kDefaultMaxSteps);
        const auto a = monte_carlo(fish, kFisheryOptimal, c);
        c.threads = 3;
        const auto b = monte_carlo(fish, kFisheryOptimal, c);
        if (!(a == b)) ++determinism_fail;
        const auto ta = sample_trajectory(fish, kFisheryOptimal, seed, 17, 1000, fishery::kAlmostExtinct);
        const auto tb = sample_trajectory(fish, kFisheryOptimal, seed, 17, 1000, fishery::kAlmostExtinct);
        if (ta.states != tb.states || ta.discounted_cost != tb.discounted_cost) ++determinism_fail;
    }

    std::ostringstream ss;
    ss << "monotonicity " << mono_fail << ", contraction " << contraction_fail << ", nondecreasing "
       << nondecreasing_fail << ", discrepancy " << discrepancy_fail << ", residual " << residual_fail
       << ", determinism " << determinism_fail << " failures";
    const bool pass = mono_fail + contraction_fail + nondecreasing_fail + discrepancy_fail + residual_fail +
                          determinism_fail ==
                      0;
    return {pass, ss.str()};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"fishery optimal policy", fishery_policy},
        {"oracle equivalence", oracle_equivalence},
        {"certified bound validity", certified_bound},
        {"rolling-horizon sandwich", sandwich},
        {"horizon study", horizon_study},
        {"monte carlo consistency", monte_carlo_consistency},
        {"recovery-cost sandwich", recovery_sandwich},
        {"property suite", property_suite},
    };
    bool all = true;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all &= o.pass;
        std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
