#include "hitctl/model.hpp"

#include "hitctl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hitctl {

namespace {

double row_sum(const std::vector<double>& row) {
    double s = 0.0;
    for (double p : row) s += p;
    return s;
}

void check_row(const std::vector<double>& row, std::size_t state_count, const std::string& where,
               std::vector<std::string>& out) {
    if (row.size() != state_count) {
        std::ostringstream msg;
        msg << where << ": transition row has " << row.size() << " entries, expected " << state_count;
        out.push_back(msg.str());
        return;
    }
    for (std::size_t y = 0; y < row.size(); ++y) {
        if (!std::isfinite(row[y]) || row[y] < 0.0) {
            std::ostringstream msg;
            msg << where << ": transition entry to state " << y << " is " << row[y]
                << " (must be finite and nonnegative)";
            out.push_back(msg.str());
        }
    }
    const double s = row_sum(row);
    if (!(std::abs(s - 1.0) <= kRowSumTolerance)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << where << ": transition row sums to " << s << ", not 1";
        out.push_back(msg.str());
    }
}

} // namespace

MarkovControlModel::MarkovControlModel(std::size_t state_count,
                                       std::vector<StateIndex> target_set,
                                       std::vector<std::vector<Action>> actions,
                                       double discount,
                                       std::vector<std::string> state_names,
                                       std::optional<std::vector<TargetAction>> in_target_dynamics)
    : state_count_(state_count),
      discount_(discount),
      target_mask_(state_count, false),
      positions_(state_count),
      actions_(std::move(actions)),
      state_names_(std::move(state_names)),
      in_target_dynamics_(std::move(in_target_dynamics)) {
    if (actions_.size() != state_count_)
        throw std::invalid_argument("action lists must be given for every state");
    for (StateIndex s : target_set) {
        if (s >= state_count_) throw std::invalid_argument("target state index out of range");
        target_mask_[s] = true;
    }
    for (StateIndex s = 0; s < state_count_; ++s) {
        if (target_mask_[s]) {
            target_states_.push_back(s);
        } else {
            positions_[s] = nontarget_states_.size();
            nontarget_states_.push_back(s);
        }
    }

    restricted_.resize(state_count_);
    for (StateIndex s = 0; s < state_count_; ++s) {
        for (const Action& a : actions_[s]) {
            std::vector<RestrictedEntry> entries;
            const std::size_t n = std::min(a.transition.size(), state_count_);
            for (StateIndex y = 0; y < n; ++y) {
                if (!target_mask_[y] && a.transition[y] != 0.0)
                    entries.push_back({*positions_[y], a.transition[y]});
            }
            restricted_[s].push_back(std::move(entries));
        }
    }
}

std::optional<std::size_t> MarkovControlModel::position(StateIndex s) const {
    return positions_.at(s);
}

std::span<const RestrictedEntry> MarkovControlModel::restricted_row(StateIndex s,
                                                                    std::size_t action) const {
    return restricted_.at(s).at(action);
}

std::string MarkovControlModel::state_name(StateIndex s) const {
    if (s < state_names_.size()) return state_names_[s];
    return std::to_string(s + 1);
}

std::optional<StateIndex> MarkovControlModel::find_state(const std::string& name) const {
    for (StateIndex s = 0; s < state_count_; ++s)
        if (state_name(s) == name) return s;
    return std::nullopt;
}

const TargetAction& MarkovControlModel::target_action(StateIndex s) const {
    if (!in_target_dynamics_) throw MissingTargetDynamics("model has no in-target dynamics");
    if (!is_target(s)) throw std::invalid_argument("state " + state_name(s) + " is not a target state");
    auto it = std::lower_bound(target_states_.begin(), target_states_.end(), s);
    return in_target_dynamics_->at(static_cast<std::size_t>(it - target_states_.begin()));
}

bool MarkovControlModel::operator==(const MarkovControlModel& other) const {
    return state_count_ == other.state_count_ && discount_ == other.discount_ &&
           target_states_ == other.target_states_ && actions_ == other.actions_ &&
           state_names_ == other.state_names_ && in_target_dynamics_ == other.in_target_dynamics_;
}

std::vector<std::string> validate_model(const MarkovControlModel& model) {
    std::vector<std::string> out;
    const std::size_t n = model.state_count();

    if (n == 0) out.emplace_back("model has no states");
    if (!(model.discount() > 0.0 && model.discount() < 1.0)) {
        std::ostringstream msg;
        msg << "discount " << model.discount() << " must lie in (0, 1)";
        out.push_back(msg.str());
    }
    if (model.target_states().empty()) out.emplace_back("target set must be nonempty");
    if (n > 0 && model.target_states().size() == n)
        out.emplace_back("target set must be strict subset of the states");

    if (!model.state_names().empty()) {
        if (model.state_names().size() != n) {
            out.emplace_back("state name list does not match the state count");
        } else {
            std::set<std::string> seen;
            for (const auto& name : model.state_names()) {
                if (name.empty()) out.emplace_back("state names must be nonempty");
                else if (!seen.insert(name).second) out.push_back("duplicate state name '" + name + "'");
            }
        }
    }

    for (StateIndex s = 0; s < n; ++s) {
        const auto& acts = model.actions(s);
        const std::string sname = "state " + model.state_name(s);
        if (model.is_target(s)) {
            if (!acts.empty()) out.push_back(sname + ": target states take no out-of-target actions");
            continue;
        }
        if (acts.empty()) out.push_back(sname + ": no feasible action");
        std::set<std::string> labels;
        for (std::size_t a = 0; a < acts.size(); ++a) {
            const std::string where = sname + ", action " + std::to_string(a) + " '" + acts[a].label + "'";
            if (!labels.insert(acts[a].label).second) out.push_back(where + ": duplicate action label");
            check_row(acts[a].transition, n, where, out);
            if (!std::isfinite(acts[a].cost) || acts[a].cost < 0.0) {
                std::ostringstream msg;
                msg << where << ": stage cost " << acts[a].cost << " must be finite and nonnegative";
                out.push_back(msg.str());
            }
        }
    }

    if (const auto& dyn = model.in_target_dynamics()) {
        if (dyn->size() != model.target_states().size()) {
            out.emplace_back("in-target dynamics must list exactly one action per target state");
        } else {
            for (std::size_t k = 0; k < dyn->size(); ++k) {
                const std::string where = "target state " + model.state_name(model.target_states()[k]) +
                                          ", in-target action '" + (*dyn)[k].label + "'";
                check_row((*dyn)[k].transition, n, where, out);
            }
        }
    }
    return out;
}

void require_valid(const MarkovControlModel& model) {
    auto violations = validate_model(model);
    if (!violations.empty()) throw ValidationError(std::move(violations));
}

void require_feasible(const MarkovControlModel& model, const StationaryPolicy& policy) {
    if (policy.size() != model.nontarget_count())
        throw InfeasibleAction("selector covers " + std::to_string(policy.size()) + " states, model has " +
                               std::to_string(model.nontarget_count()) + " non-target states");
    for (std::size_t i = 0; i < policy.size(); ++i) {
        const StateIndex s = model.state_at(i);
        if (policy[i] >= model.actions(s).size())
            throw InfeasibleAction("action " + std::to_string(policy[i]) + " is not feasible in state " +
                                   model.state_name(s));
    }
}

MarkovControlModel with_unit_costs(const MarkovControlModel& model) {
    auto actions = model.all_actions();
    for (auto& acts : actions)
        for (auto& a : acts) a.cost = 1.0;
    return MarkovControlModel(model.state_count(), model.target_states(), std::move(actions), model.discount(),
                              model.state_names(), model.in_target_dynamics());
}

MarkovControlModel with_target_dynamics(const MarkovControlModel& model, std::vector<TargetAction> dynamics) {
    return MarkovControlModel(model.state_count(), model.target_states(), model.all_actions(), model.discount(),
                              model.state_names(), std::move(dynamics));
}

StationaryPolicy first_action_policy(const MarkovControlModel& model) {
    return StationaryPolicy{std::vector<std::size_t>(model.nontarget_count(), 0)};
}

void renormalize_row(std::vector<double>& row) {
    if (row.empty()) return;
    auto largest = std::max_element(row.begin(), row.end());
    for (int pass = 0; pass < 8; ++pass) {
        const double s = row_sum(row);
        if (s == 1.0) return;
        *largest += 1.0 - s;
    }
}

double weighted_sup_norm(std::span<const double> u, std::span<const double> weight) {
    double norm = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double w = weight.empty() ? 1.0 : weight[i];
        norm = std::max(norm, std::abs(u[i]) / w);
    }
    return norm;
}

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error([&] {
          std::string msg = "model validation failed";
          for (const auto& v : violations) msg += "\n  - " + v;
          return msg;
      }()),
      violations_(std::move(violations)) {}

} // namespace hitctl
