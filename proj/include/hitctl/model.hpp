#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hitctl {

using StateIndex = std::size_t;

/// Row-sum tolerance for transition rows.
inline constexpr double kRowSumTolerance = 1e-12;

/// One feasible action of a non-target state: its kernel row over ALL states
/// and its stage cost.
struct Action {
    std::string label;
    std::vector<double> transition;
    double cost = 0.0;

    bool operator==(const Action&) const = default;
};

/// The fixed in-target action g*(x) of a target state and its kernel row.
struct TargetAction {
    std::string label;
    std::vector<double> transition;

    bool operator==(const TargetAction&) const = default;
};

/// Sparse entry of a transition row restricted to the non-target states.
/// `position` indexes the non-target states, not the full state space.
struct RestrictedEntry {
    std::size_t position;
    double probability;
};

/**
A finite Markov control model stopped at the first hit of a target set K.

States are the dense indices 0..state_count-1. Costs and actions are only
defined outside K; value functions and selectors are indexed by the
position of a state among the non-target states (ascending state order).

The constructor only checks the structure it needs to build its indices
(target indices in range, one action list per state). Semantic invariants
(stochastic rows, nonnegative costs, ...) are reported by validate_model().
*/
class MarkovControlModel {
public:
    /// `actions` has one entry per state; entries of target states must be empty.
    /// `in_target_dynamics`, when present, has one entry per target state in
    /// ascending target-state order.
    MarkovControlModel(std::size_t state_count,
                       std::vector<StateIndex> target_set,
                       std::vector<std::vector<Action>> actions,
                       double discount,
                       std::vector<std::string> state_names = {},
                       std::optional<std::vector<TargetAction>> in_target_dynamics = std::nullopt);

    std::size_t state_count() const noexcept { return state_count_; }
    double discount() const noexcept { return discount_; }

    bool is_target(StateIndex s) const { return target_mask_.at(s); }
    const std::vector<StateIndex>& target_states() const noexcept { return target_states_; }
    const std::vector<StateIndex>& nontarget_states() const noexcept { return nontarget_states_; }
    std::size_t nontarget_count() const noexcept { return nontarget_states_.size(); }

    /// Position of a non-target state among nontarget_states(); nullopt for targets.
    std::optional<std::size_t> position(StateIndex s) const;
    /// Inverse of position().
    StateIndex state_at(std::size_t position) const { return nontarget_states_.at(position); }

    const std::vector<Action>& actions(StateIndex s) const { return actions_.at(s); }
    const std::vector<std::vector<Action>>& all_actions() const noexcept { return actions_; }

    /// Row Q(.|x,a) restricted to X\K, as sparse (position, probability) pairs.
    std::span<const RestrictedEntry> restricted_row(StateIndex s, std::size_t action) const;

    const std::vector<std::string>& state_names() const noexcept { return state_names_; }
    /// Display name of a state (falls back to the 1-based index).
    std::string state_name(StateIndex s) const;
    /// Resolve a display name; nullopt when unknown.
    std::optional<StateIndex> find_state(const std::string& name) const;

    bool has_target_dynamics() const noexcept { return in_target_dynamics_.has_value(); }
    const std::optional<std::vector<TargetAction>>& in_target_dynamics() const noexcept {
        return in_target_dynamics_;
    }
    /// g*(x) for a target state x. Throws MissingTargetDynamics when absent.
    const TargetAction& target_action(StateIndex s) const;

    bool operator==(const MarkovControlModel& other) const;

private:
    std::size_t state_count_;
    double discount_;
    std::vector<StateIndex> target_states_;
    std::vector<StateIndex> nontarget_states_;
    std::vector<bool> target_mask_;
    std::vector<std::optional<std::size_t>> positions_;
    std::vector<std::vector<Action>> actions_;
    std::vector<std::vector<std::vector<RestrictedEntry>>> restricted_;
    std::vector<std::string> state_names_;
    std::optional<std::vector<TargetAction>> in_target_dynamics_;
};

/// Real vector indexed by non-target positions. The value on K is 0 and is
/// never stored.
struct ValueFunction {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    bool operator==(const ValueFunction&) const = default;
};

/// Selector: for each non-target position, the index of the chosen action in
/// the state's action list.
struct StationaryPolicy {
    std::vector<std::size_t> actions;

    std::size_t size() const noexcept { return actions.size(); }
    std::size_t operator[](std::size_t i) const { return actions[i]; }

    bool operator==(const StationaryPolicy&) const = default;
};

/// Selectors (f_N, ..., f_0), newest first.
struct HorizonPolicy {
    std::vector<StationaryPolicy> selectors;

    bool operator==(const HorizonPolicy&) const = default;
};

/// Every invariant violation of `model`, with state/action coordinates.
/// Empty iff the model is well formed.
std::vector<std::string> validate_model(const MarkovControlModel& model);

/// Throws ValidationError when validate_model() reports anything.
void require_valid(const MarkovControlModel& model);

/// Throws InfeasibleAction unless policy is a selector of `model`.
void require_feasible(const MarkovControlModel& model, const StationaryPolicy& policy);

/// Copy of `model` with every stage cost replaced by 1 (indicator of X\K).
MarkovControlModel with_unit_costs(const MarkovControlModel& model);

/// Copy of `model` with the given in-target dynamics attached.
MarkovControlModel with_target_dynamics(const MarkovControlModel& model,
                                        std::vector<TargetAction> dynamics);

/// Selector that picks the lowest-indexed action everywhere.
StationaryPolicy first_action_policy(const MarkovControlModel& model);

/// Fold the residual 1 - sum into the largest entry until the in-order sum
/// is exactly 1. Only meant for rows already within kRowSumTolerance.
void renormalize_row(std::vector<double>& row);

/// sup_x |u(x)| / w(x). Empty weight means w == 1.
double weighted_sup_norm(std::span<const double> u, std::span<const double> weight = {});

} // namespace hitctl
