#pragma once

#include "hitctl/certificate.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace hitctl {

/// Cell token for hitting times of runs that never reached the target.
inline constexpr const char* kCensoredToken = "CENSORED";

/// Shortest round-trip decimal, independent of the global locale.
/// Throws std::invalid_argument for non-finite values.
std::string format_number(double value);

/// format_number() or kCensoredToken for nullopt.
std::string format_number(const std::optional<double>& value);

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
};

/// Comma-separated rendering with a header line and '\n' line endings.
std::string to_csv(const Table& table);

struct RunReport {
    std::string command;
    std::vector<std::pair<std::string, std::string>> config;
    std::optional<WeightCertificate> certificate;
    std::vector<std::pair<std::string, std::string>> notes;
    std::vector<Table> tables;
    double wall_clock_seconds = 0.0;
};

void render(std::ostream& out, const RunReport& report);

} // namespace hitctl
