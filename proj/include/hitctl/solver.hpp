#pragma once

#include "hitctl/certificate.hpp"
#include "hitctl/errors.hpp"
#include "hitctl/model.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace hitctl {

/// Result of one application of the restricted dynamic programming operator.
struct Backup {
    ValueFunction value;
    StationaryPolicy selector;
};

/// c(x,a) + discount * sum_{y not in K} Q(y|x,a) u(y).
double action_value(const MarkovControlModel& model, const ValueFunction& u, StateIndex s, std::size_t a);

/// (Tu)(x) = min_a [c(x,a) + discount * sum_{y not in K} Q(y|x,a) u(y)], with
/// the argmin selector. Ties go to the lowest action index.
Backup bellman_apply(const MarkovControlModel& model, const ValueFunction& u);

struct ValueIterationOptions {
    /// Target for the certified weighted gap cost_bound * modulus^n / (1 - modulus).
    double tolerance = 1e-9;
    std::size_t max_iter = 100000;
    bool record_history = false;
};

struct ValueIterationResult {
    ValueFunction value;
    std::size_t iterations = 0;
    /// V*(x) - v_n(x) <= sup_gap_bound * w(x).
    double sup_gap_bound = 0.0;
    StationaryPolicy greedy;
    /// ||v_k - v_{k-1}||_w for k = 1..n, when requested.
    std::vector<double> history;
};

/// Raised when the certified bound has not met the tolerance after max_iter
/// steps; the partial result travels with the error.
class NotConverged : public Error {
public:
    explicit NotConverged(ValueIterationResult partial);
    const ValueIterationResult& result() const noexcept { return result_; }

private:
    ValueIterationResult result_;
};

/// Value iteration from v_0 = 0 with the a-priori stopping rule. Iterates are
/// checked to be pointwise nondecreasing. With max_iter = 0 the greedy
/// selector is the lowest-indexed action.
ValueIterationResult value_iteration(const MarkovControlModel& model, const ValueIterationOptions& options,
                                     const WeightCertificate& certificate);

/// Bellman defect D(x,a) of action `a` at non-target state `s` against v_star.
/// Values within 1e-9 below zero are clamped to 0.
double discrepancy(const MarkovControlModel& model, const ValueFunction& v_star, StateIndex s, std::size_t a);

/// The selectors f_1..f_n of n value-iteration steps, newest first, followed
/// by f_0 (lowest-indexed action). Requires n >= 1.
HorizonPolicy vi_policy_sequence(const MarkovControlModel& model, std::size_t n);

struct OptimalSolution {
    ValueFunction value;
    StationaryPolicy policy;
};

inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

/// Exhaustive search over deterministic stationary policies with exact
/// evaluation of each. Throws TooLarge when the policy count exceeds `cap`.
OptimalSolution brute_force_optimal(const MarkovControlModel& model, std::size_t cap = kDefaultEnumerationCap);

/// (1 - E[discount^tau]) / (1 - discount) from state `s` under `policy`,
/// i.e. the policy's value under the indicator cost of X\K.
double dssp_value(const MarkovControlModel& model, const StationaryPolicy& policy, StateIndex s);

} // namespace hitctl
