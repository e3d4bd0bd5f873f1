#pragma once

#include "hitctl/model.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hitctl {

inline constexpr int kModelSchemaVersion = 1;

/// Contents of a model file: the model plus the optional weight vector
/// (indexed by non-target position).
struct ModelFile {
    MarkovControlModel model;
    std::optional<std::vector<double>> weight;
};

/// Parses and validates a model document. Throws ParseError on malformed
/// text or unresolved names and ValidationError on invariant violations.
ModelFile parse_model(const std::string& text);

/// Reads and parses a model file; IoError when it cannot be read.
ModelFile load_model_file(const std::filesystem::path& path);

MarkovControlModel load_model(const std::filesystem::path& path);

/// Serializes with total costs and sparse rows keyed by state name.
std::string dump_model(const ModelFile& file);

void save_model(const std::filesystem::path& path, const ModelFile& file);

/// Selector file: {"policy": {"<state>": "<action label>", ...}}.
StationaryPolicy parse_policy(const MarkovControlModel& model, const std::string& text);

StationaryPolicy load_policy(const MarkovControlModel& model, const std::filesystem::path& path);

} // namespace hitctl
