#include "hitctl/report.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace hitctl {

std::string format_number(double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("report cells must be finite");
    if (value == 0.0) value = 0.0; // drop the sign of -0
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

std::string format_number(const std::optional<double>& value) {
    return value ? format_number(*value) : std::string(kCensoredToken);
}

void Table::add_row(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw std::logic_error("row width does not match table '" + name + "'");
    rows.push_back(std::move(row));
}

std::string to_csv(const Table& table) {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(table.columns);
    for (const auto& row : table.rows) line(row);
    return out;
}

void render(std::ostream& out, const RunReport& report) {
    out << "# command: " << report.command << '\n';
    for (const auto& [key, value] : report.config) out << "# " << key << ": " << value << '\n';
    if (report.certificate) {
        const auto& c = *report.certificate;
        out << "# cost_bound: " << format_number(c.cost_bound) << '\n'
            << "# drift_bound: " << format_number(c.drift_bound) << '\n'
            << "# modulus: " << format_number(c.modulus) << '\n';
    }
    for (const auto& [key, value] : report.notes) out << "# " << key << ": " << value << '\n';
    out << "# wall_clock_seconds: " << format_number(report.wall_clock_seconds) << '\n';
    for (const auto& table : report.tables) out << "\n[" << table.name << "]\n" << to_csv(table);
}

} // namespace hitctl
