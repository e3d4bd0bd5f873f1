#pragma once

#include "hitctl/certificate.hpp"
#include "hitctl/model.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace hitctl {

enum class EvaluationMethod { automatic, exact, iterative };

/// Non-target states up to which `automatic` picks the dense solve.
inline constexpr std::size_t kExactEvaluationLimit = 2000;

struct EvaluationOptions {
    EvaluationMethod method = EvaluationMethod::automatic;
    /// Residual tolerance; also the certified-gap target of the iterative method.
    double tolerance = 1e-9;
    std::size_t max_iter = 1'000'000;
    /// Weight for the residual norm (empty: w == 1).
    std::vector<double> weight;
};

struct PolicyEvaluation {
    ValueFunction value;
    EvaluationMethod method = EvaluationMethod::exact;
    /// ||c_f + discount * Q_f u - u||_w of the returned u.
    double residual = 0.0;
};

/// V(f, .) as the solution of (I - discount * Q_f restricted to X\K) V = c_f.
/// Throws SolveFailed when the dense solve is singular or the residual
/// exceeds the tolerance.
PolicyEvaluation evaluate_policy(const MarkovControlModel& model, const StationaryPolicy& policy,
                                 const EvaluationOptions& options = {});

/// Exact evaluation with caller-supplied per-state costs (indexed by position).
ValueFunction evaluate_with_costs(const MarkovControlModel& model, const StationaryPolicy& policy,
                                  std::span<const double> costs);

struct RollingHorizonCertificate {
    std::size_t horizon = 0;
    /// Argmin selector of the step v_{N+1} = T v_N.
    StationaryPolicy stationary_selector;
    ValueFunction vi_value;
    ValueFunction achieved_value;
    /// cost_bound * modulus^(N+1) / (1 - modulus).
    double bound = 0.0;
    std::vector<double> weight;
};

/// Rolling-horizon policy of horizon N with its sandwich certificate
///   0 <= V(f_N, x) - v_{N+1}(x) <= bound * w(x),
/// which is checked before returning (std::logic_error on failure).
RollingHorizonCertificate rolling_horizon(const MarkovControlModel& model, std::size_t horizon,
                                          const WeightCertificate& certificate);

/// Policy over the whole state space: a selector outside K and the fixed
/// in-target action g* on K. Entries are action indices into
/// model.actions(x) for x outside K and 0 for x in K; nullopt leaves a state
/// undefined.
struct TotalPolicy {
    std::vector<std::optional<std::size_t>> actions;

    bool operator==(const TotalPolicy&) const = default;
};

/// Selector outside K, undefined on K (enough for runs stopped at K).
TotalPolicy stopped_policy(const MarkovControlModel& model, const StationaryPolicy& policy);

/// Concatenation of `recovery` outside K with g* on K.
/// Throws MissingTargetDynamics when the model has no in-target dynamics.
TotalPolicy concatenate_recovery(const MarkovControlModel& model, const StationaryPolicy& recovery);

struct RecoveryBounds {
    double beta_lower = 0.0;
    double beta_upper = 0.0;
};

/// beta_1 / beta_2: min / max over target states of
/// sum_{y not in K} Q(y|x, g*) V*(y).
RecoveryBounds recovery_bounds(const MarkovControlModel& model, const ValueFunction& v_star);

/// Same extrema but with each target row conditioned on leaving K, i.e. the
/// expected V* at the first state of an excursion started from that target
/// state after one step. Target states whose row never leaves K are skipped;
/// nullopt when no row leaves K.
std::optional<RecoveryBounds> exit_conditioned_bounds(const MarkovControlModel& model,
                                                      const ValueFunction& v_star);

} // namespace hitctl
