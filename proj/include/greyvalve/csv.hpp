#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "greyvalve/simulator.hpp"

namespace greyvalve {

// Plain comma-separated table. Cells are kept as text so that columns can be
// passed through untouched; no quoting is supported or needed by the formats
// this library writes.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // -1 when absent.
    int column(std::string_view name) const;
    // Throws InputError naming the missing column.
    std::size_t require_column(std::string_view name) const;
    // Throws InputError naming row and column when the cell is not a number.
    double number(std::size_t row, std::size_t col) const;
    std::vector<double> numeric_column(std::string_view name) const;
};

CsvTable parse_csv(std::istream& in, const std::string& source = "<stream>");
// Throws IoError when the file cannot be opened.
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(std::ostream& out, const CsvTable& table);

// %.17g, enough digits for an exact double round trip.
std::string format_double(double v);

// Writes to a temporary sibling and renames it into place. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

inline constexpr std::string_view kTelemetryHeader =
    "t,cv,x,x_sensed,p1,p1_sensed,p2,p2_sensed,temp,q,q_sensed,fault_ids,fault_intensities";

void write_telemetry_csv(std::ostream& out, std::span<const TelemetryRecord> records);
std::string telemetry_csv(std::span<const TelemetryRecord> records);

}  // namespace greyvalve
