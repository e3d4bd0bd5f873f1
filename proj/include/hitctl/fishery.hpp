#pragma once

#include "hitctl/model.hpp"

#include <vector>

namespace hitctl::fishery {

// Population levels 1..4 are state indices 0..3; level 4 is the target.
inline constexpr StateIndex kAlmostExtinct = 0;
inline constexpr StateIndex kTargetLevel = 3;

// Action indices, in the order of the transition matrices T1..T5.
inline constexpr std::size_t kHarvest = 0;
inline constexpr std::size_t kHarvestLess = 1;
inline constexpr std::size_t kDoNothing = 2;
inline constexpr std::size_t kImport = 3;
inline constexpr std::size_t kImportLess = 4;

/// Four-level fishery recovery model, discount 0.9.
/// Stage cost c(x,a) = C(x) + A(x,a).
MarkovControlModel model();

/// Synthetic in-target row for level 4 that always leaves the target
/// (population drops to level 1/2/3 with probabilities 0.2/0.3/0.5).
TargetAction exit_row();

/// model() with exit_row() attached as the in-target dynamics.
MarkovControlModel recovery_model();

} // namespace hitctl::fishery
