#include "hitctl/fishery.hpp"

#include <array>
#include <string>

namespace hitctl::fishery {

namespace {

constexpr std::size_t kLevels = 4;
constexpr std::size_t kActions = 5;

// transition[a][x] = T_{a+1}(x, .) for the three non-target levels.
constexpr std::array<std::array<std::array<double, kLevels>, 3>, kActions> kTransition{{
    {{{1, 0, 0, 0}, {0.7, 0.3, 0, 0}, {0.1, 0.6, 0.3, 0}}},
    {{{1, 0, 0, 0}, {0.35, 0.65, 0, 0}, {0.04, 0.5, 0.46, 0}}},
    {{{0.99, 0.01, 0, 0}, {0.01, 0.7, 0.28, 0.01}, {0, 0.03, 0.65, 0.32}}},
    {{{0.4, 0.6, 0, 0}, {0, 0.3, 0.65, 0.05}, {0, 0, 0.25, 0.75}}},
    {{{0.6, 0.4, 0, 0}, {0, 0.45, 0.54, 0.01}, {0, 0, 0.45, 0.55}}},
}};

constexpr std::array<double, 3> kBaseCost{300, 150, 100};

constexpr std::array<std::array<double, kActions>, 3> kActionCost{{
    {-20, -10, 0, 150, 75},
    {-40, -20, 0, 150, 75},
    {-80, -40, 0, 150, 75},
}};

const std::array<const char*, kActions> kLabels{"harvest", "harvest-less", "do-nothing", "import", "import-less"};

} // namespace

MarkovControlModel model() {
    std::vector<std::vector<Action>> actions(kLevels);
    for (std::size_t x = 0; x < 3; ++x) {
        for (std::size_t a = 0; a < kActions; ++a) {
            const auto& row = kTransition[a][x];
            actions[x].push_back(Action{kLabels[a], std::vector<double>(row.begin(), row.end()),
                                        kBaseCost[x] + kActionCost[x][a]});
        }
    }
    for (auto& acts : actions)
        for (auto& a : acts) renormalize_row(a.transition);
    return MarkovControlModel(kLevels, {kTargetLevel}, std::move(actions), 0.9, {"1", "2", "3", "4"});
}

TargetAction exit_row() {
    return TargetAction{"open-season", {0.2, 0.3, 0.5, 0.0}};
}

MarkovControlModel recovery_model() {
    return with_target_dynamics(model(), {exit_row()});
}

} // namespace hitctl::fishery
