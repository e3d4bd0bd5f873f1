#include "hitctl/solver.hpp"

#include "hitctl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hitctl {

namespace {

constexpr double kClampTolerance = 1e-9;

void check_value_size(const MarkovControlModel& model, const ValueFunction& u) {
    if (u.size() != model.nontarget_count())
        throw std::invalid_argument("value function size " + std::to_string(u.size()) +
                                    " does not match the non-target state count " +
                                    std::to_string(model.nontarget_count()));
}

std::vector<double> difference(const ValueFunction& a, const ValueFunction& b) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

} // namespace

double action_value(const MarkovControlModel& model, const ValueFunction& u, StateIndex s, std::size_t a) {
    double expected = 0.0;
    for (const auto& e : model.restricted_row(s, a)) expected += e.probability * u[e.position];
    return model.actions(s)[a].cost + model.discount() * expected;
}

Backup bellman_apply(const MarkovControlModel& model, const ValueFunction& u) {
    check_value_size(model, u);
    const std::size_t m = model.nontarget_count();
    Backup out{ValueFunction{std::vector<double>(m)}, StationaryPolicy{std::vector<std::size_t>(m)}};
    for (std::size_t i = 0; i < m; ++i) {
        const StateIndex s = model.state_at(i);
        const std::size_t n_actions = model.actions(s).size();
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_action = 0;
        for (std::size_t a = 0; a < n_actions; ++a) {
            const double q = action_value(model, u, s, a);
            if (q < best) {
                best = q;
                best_action = a;
            }
        }
        out.value[i] = best;
        out.selector.actions[i] = best_action;
    }
    return out;
}

NotConverged::NotConverged(ValueIterationResult partial)
    : Error("value iteration stopped after " + std::to_string(partial.iterations) +
            " iterations with certified gap " + std::to_string(partial.sup_gap_bound) + " above tolerance"),
      result_(std::move(partial)) {}

ValueIterationResult value_iteration(const MarkovControlModel& model, const ValueIterationOptions& options,
                                     const WeightCertificate& certificate) {
    if (!(options.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (certificate.weight.size() != model.nontarget_count())
        throw std::invalid_argument("certificate does not match the model");

    const std::size_t m = model.nontarget_count();
    ValueIterationResult result;
    result.value = ValueFunction{std::vector<double>(m, 0.0)};
    result.greedy = first_action_policy(model);
    result.sup_gap_bound = certificate.gap_bound(0);

    while (result.sup_gap_bound > options.tolerance && result.iterations < options.max_iter) {
        Backup next = bellman_apply(model, result.value);
        for (std::size_t i = 0; i < m; ++i) {
            // Exact under monotone rounding: T is monotone and v_1 >= v_0 = 0.
            if (next.value[i] < result.value[i])
                throw std::logic_error("value iteration lost monotonicity at state " +
                                       model.state_name(model.state_at(i)));
        }
        if (options.record_history)
            result.history.push_back(weighted_sup_norm(difference(next.value, result.value), certificate.weight));
        result.value = std::move(next.value);
        result.greedy = std::move(next.selector);
        ++result.iterations;
        result.sup_gap_bound = certificate.gap_bound(result.iterations);
    }
    if (result.sup_gap_bound > options.tolerance) throw NotConverged(std::move(result));
    return result;
}

double discrepancy(const MarkovControlModel& model, const ValueFunction& v_star, StateIndex s, std::size_t a) {
    check_value_size(model, v_star);
    const auto pos = model.position(s);
    if (!pos) throw InfeasibleAction("state " + model.state_name(s) + " is a target state");
    if (a >= model.actions(s).size())
        throw InfeasibleAction("action " + std::to_string(a) + " is not feasible in state " + model.state_name(s));
    const double d = action_value(model, v_star, s, a) - v_star[*pos];
    if (d < 0.0 && d > -kClampTolerance) return 0.0;
    return d;
}

HorizonPolicy vi_policy_sequence(const MarkovControlModel& model, std::size_t n) {
    if (n == 0) throw std::invalid_argument("policy sequence length must be at least 1");
    HorizonPolicy out;
    out.selectors.reserve(n + 1);
    ValueFunction v{std::vector<double>(model.nontarget_count(), 0.0)};
    for (std::size_t k = 1; k <= n; ++k) {
        Backup next = bellman_apply(model, v);
        v = std::move(next.value);
        out.selectors.push_back(std::move(next.selector));
    }
    std::reverse(out.selectors.begin(), out.selectors.end());
    out.selectors.push_back(first_action_policy(model));
    return out;
}

OptimalSolution brute_force_optimal(const MarkovControlModel& model, std::size_t cap) {
    const std::size_t m = model.nontarget_count();
    std::size_t total = 1;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t k = model.actions(model.state_at(i)).size();
        if (k == 0) throw std::invalid_argument("state without feasible actions");
        if (total > cap / k) throw TooLarge("policy enumeration exceeds the cap of " + std::to_string(cap));
        total *= k;
    }

    const EvaluationOptions exact{EvaluationMethod::exact};
    std::vector<StationaryPolicy> policies;
    std::vector<ValueFunction> values;
    policies.reserve(total);
    values.reserve(total);

    StationaryPolicy current = first_action_policy(model);
    for (std::size_t count = 0; count < total; ++count) {
        values.push_back(evaluate_policy(model, current, exact).value);
        policies.push_back(current);
        // Odometer increment over the action indices.
        for (std::size_t i = 0; i < m; ++i) {
            if (++current.actions[i] < model.actions(model.state_at(i)).size()) break;
            current.actions[i] = 0;
        }
    }

    ValueFunction lower{std::vector<double>(m, std::numeric_limits<double>::infinity())};
    for (const auto& v : values)
        for (std::size_t i = 0; i < m; ++i) lower[i] = std::min(lower[i], v[i]);

    // The pointwise minimum must be attained by a single stationary policy.
    for (std::size_t k = 0; k < total; ++k) {
        bool attains = true;
        for (std::size_t i = 0; i < m && attains; ++i)
            attains = values[k][i] - lower[i] <= 1e-10 * std::max(1.0, std::abs(lower[i]));
        if (attains) return OptimalSolution{lower, policies[k]};
    }
    throw std::logic_error("no stationary policy attains the pointwise minimum");
}

double dssp_value(const MarkovControlModel& model, const StationaryPolicy& policy, StateIndex s) {
    const auto pos = model.position(s);
    if (!pos) throw std::invalid_argument("state " + model.state_name(s) + " is a target state");
    const std::vector<double> ones(model.nontarget_count(), 1.0);
    return evaluate_with_costs(model, policy, ones)[*pos];
}

} // namespace hitctl
