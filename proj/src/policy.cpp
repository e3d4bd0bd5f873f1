#include "hitctl/policy.hpp"

#include "hitctl/errors.hpp"
#include "hitctl/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hitctl {

namespace {

// Slack for the sandwich check: floating-point noise of a dense solve.
constexpr double kSandwichSlack = 1e-9;

std::vector<double> policy_costs(const MarkovControlModel& model, const StationaryPolicy& policy) {
    std::vector<double> c(policy.size());
    for (std::size_t i = 0; i < policy.size(); ++i) c[i] = model.actions(model.state_at(i))[policy[i]].cost;
    return c;
}

ValueFunction apply_policy_operator(const MarkovControlModel& model, const StationaryPolicy& policy,
                                    std::span<const double> costs, const ValueFunction& u) {
    ValueFunction out{std::vector<double>(u.size())};
    for (std::size_t i = 0; i < u.size(); ++i) {
        double expected = 0.0;
        for (const auto& e : model.restricted_row(model.state_at(i), policy[i])) expected += e.probability * u[e.position];
        out[i] = costs[i] + model.discount() * expected;
    }
    return out;
}

double policy_residual(const MarkovControlModel& model, const StationaryPolicy& policy,
                       std::span<const double> costs, const ValueFunction& u, std::span<const double> weight) {
    const ValueFunction tu = apply_policy_operator(model, policy, costs, u);
    std::vector<double> defect(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) defect[i] = tu[i] - u[i];
    return weighted_sup_norm(defect, weight);
}

ValueFunction solve_dense(const MarkovControlModel& model, const StationaryPolicy& policy,
                          std::span<const double> costs) {
    const auto m = static_cast<Eigen::Index>(policy.size());
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (const auto& e : model.restricted_row(model.state_at(static_cast<std::size_t>(i)),
                                                  policy[static_cast<std::size_t>(i)]))
            system(i, static_cast<Eigen::Index>(e.position)) -= model.discount() * e.probability;
        rhs(i) = costs[static_cast<std::size_t>(i)];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    if (m > 0 && !(lu.rcond() > std::numeric_limits<double>::epsilon()))
        throw SolveFailed("policy evaluation system is singular");
    const Eigen::VectorXd solution = lu.solve(rhs);
    ValueFunction out{std::vector<double>(solution.data(), solution.data() + m)};
    for (double v : out.values)
        if (!std::isfinite(v)) throw SolveFailed("policy evaluation produced a non-finite value");
    return out;
}

} // namespace

PolicyEvaluation evaluate_policy(const MarkovControlModel& model, const StationaryPolicy& policy,
                                 const EvaluationOptions& options) {
    require_feasible(model, policy);
    if (!options.weight.empty() && options.weight.size() != policy.size())
        throw std::invalid_argument("weight must have one entry per non-target state");

    const std::vector<double> costs = policy_costs(model, policy);
    PolicyEvaluation out;
    out.method = options.method;
    if (out.method == EvaluationMethod::automatic)
        out.method = policy.size() <= kExactEvaluationLimit ? EvaluationMethod::exact : EvaluationMethod::iterative;

    if (out.method == EvaluationMethod::exact) {
        out.value = solve_dense(model, policy, costs);
    } else {
        // Fixed-point iteration from 0; stop on the same certified bound as
        // value iteration, computed for the policy's own one-action model.
        WeightCertificate cert;
        cert.weight = options.weight.empty() ? std::vector<double>(policy.size(), 1.0) : options.weight;
        cert.drift_bound = 1.0;
        for (std::size_t i = 0; i < policy.size(); ++i) {
            cert.cost_bound = std::max(cert.cost_bound, costs[i] / cert.weight[i]);
            double mass = 0.0;
            for (const auto& e : model.restricted_row(model.state_at(i), policy[i]))
                mass += e.probability * cert.weight[e.position];
            cert.drift_bound = std::max(cert.drift_bound, mass / cert.weight[i]);
        }
        cert.modulus = model.discount() * cert.drift_bound;
        if (!(cert.modulus < 1.0)) throw SolveFailed("policy operator is not a contraction for this weight");

        // Certified gap <= tolerance / 2 keeps the residual (<= (1 + modulus) * gap) within tolerance.
        out.value = ValueFunction{std::vector<double>(policy.size(), 0.0)};
        std::size_t n = 0;
        while (cert.gap_bound(n) > 0.5 * options.tolerance && n < options.max_iter) {
            out.value = apply_policy_operator(model, policy, costs, out.value);
            ++n;
        }
    }

    out.residual = policy_residual(model, policy, costs, out.value, options.weight);
    if (!(out.residual <= options.tolerance))
        throw SolveFailed("policy evaluation residual " + std::to_string(out.residual) + " exceeds tolerance");
    for (double& v : out.value.values) v = std::max(v, 0.0);
    return out;
}

ValueFunction evaluate_with_costs(const MarkovControlModel& model, const StationaryPolicy& policy,
                                  std::span<const double> costs) {
    require_feasible(model, policy);
    if (costs.size() != policy.size()) throw std::invalid_argument("one cost per non-target state expected");
    return solve_dense(model, policy, costs);
}

RollingHorizonCertificate rolling_horizon(const MarkovControlModel& model, std::size_t horizon,
                                          const WeightCertificate& certificate) {
    if (certificate.weight.size() != model.nontarget_count())
        throw std::invalid_argument("certificate does not match the model");

    ValueFunction v{std::vector<double>(model.nontarget_count(), 0.0)};
    Backup last;
    for (std::size_t k = 0; k <= horizon; ++k) {
        last = bellman_apply(model, v);
        v = last.value;
    }

    RollingHorizonCertificate out;
    out.horizon = horizon;
    out.stationary_selector = std::move(last.selector);
    out.vi_value = std::move(last.value);
    out.achieved_value = evaluate_policy(model, out.stationary_selector).value;
    out.bound = certificate.gap_bound(horizon + 1);
    out.weight = certificate.weight;

    for (std::size_t i = 0; i < out.vi_value.size(); ++i) {
        const double gap = out.achieved_value[i] - out.vi_value[i];
        const double slack = kSandwichSlack * std::max(1.0, std::abs(out.achieved_value[i]));
        if (gap < -slack || gap > out.bound * out.weight[i] + slack)
            throw std::logic_error("rolling-horizon sandwich violated at state " +
                                   model.state_name(model.state_at(i)) + " for horizon " + std::to_string(horizon));
    }
    return out;
}

TotalPolicy stopped_policy(const MarkovControlModel& model, const StationaryPolicy& policy) {
    require_feasible(model, policy);
    TotalPolicy out;
    out.actions.resize(model.state_count());
    for (std::size_t i = 0; i < policy.size(); ++i) out.actions[model.state_at(i)] = policy[i];
    return out;
}

TotalPolicy concatenate_recovery(const MarkovControlModel& model, const StationaryPolicy& recovery) {
    if (!model.has_target_dynamics()) throw MissingTargetDynamics("recovery concatenation needs in-target dynamics");
    TotalPolicy out = stopped_policy(model, recovery);
    for (StateIndex s : model.target_states()) out.actions[s] = 0;
    return out;
}

namespace {

double restricted_target_mass(const MarkovControlModel& model, const TargetAction& g, const ValueFunction& v) {
    double sum = 0.0;
    for (StateIndex y = 0; y < model.state_count(); ++y)
        if (const auto pos = model.position(y)) sum += g.transition[y] * v[*pos];
    return sum;
}

double exit_probability(const MarkovControlModel& model, const TargetAction& g) {
    double sum = 0.0;
    for (StateIndex y = 0; y < model.state_count(); ++y)
        if (!model.is_target(y)) sum += g.transition[y];
    return sum;
}

} // namespace

RecoveryBounds recovery_bounds(const MarkovControlModel& model, const ValueFunction& v_star) {
    if (!model.has_target_dynamics()) throw MissingTargetDynamics("recovery bounds need in-target dynamics");
    if (v_star.size() != model.nontarget_count()) throw std::invalid_argument("value function size mismatch");
    RecoveryBounds out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (StateIndex s : model.target_states()) {
        const double b = restricted_target_mass(model, model.target_action(s), v_star);
        out.beta_lower = std::min(out.beta_lower, b);
        out.beta_upper = std::max(out.beta_upper, b);
    }
    return out;
}

std::optional<RecoveryBounds> exit_conditioned_bounds(const MarkovControlModel& model,
                                                      const ValueFunction& v_star) {
    if (!model.has_target_dynamics()) throw MissingTargetDynamics("recovery bounds need in-target dynamics");
    if (v_star.size() != model.nontarget_count()) throw std::invalid_argument("value function size mismatch");
    std::optional<RecoveryBounds> out;
    for (StateIndex s : model.target_states()) {
        const TargetAction& g = model.target_action(s);
        const double exit = exit_probability(model, g);
        if (exit <= 0.0) continue;
        const double b = restricted_target_mass(model, g, v_star) / exit;
        if (!out) out = RecoveryBounds{b, b};
        out->beta_lower = std::min(out->beta_lower, b);
        out->beta_upper = std::max(out->beta_upper, b);
    }
    return out;
}

} // namespace hitctl
