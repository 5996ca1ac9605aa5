#include "greyvalve/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "greyvalve/error.hpp"

namespace greyvalve {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

}  // namespace

int CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

std::size_t CsvTable::require_column(std::string_view name) const {
    const int c = column(name);
    if (c < 0) throw InputError("missing column '" + std::string(name) + "'");
    return static_cast<std::size_t>(c);
}

double CsvTable::number(std::size_t row, std::size_t col) const {
    const std::string& s = rows.at(row).at(col);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
        throw InputError("row " + std::to_string(row + 1) + ", column '" + header.at(col) +
                         "': not a number: '" + s + "'");
    }
    return v;
}

std::vector<double> CsvTable::numeric_column(std::string_view name) const {
    const std::size_t c = require_column(name);
    std::vector<double> out(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) out[r] = number(r, c);
    return out;
}

CsvTable parse_csv(std::istream& in, const std::string& source) {
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        for (auto& c : cells) c = trim(std::move(c));
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw InputError(source + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(t.header.size()) + " fields, got " +
                             std::to_string(cells.size()));
        }
        t.rows.push_back(std::move(cells));
    }
    if (!have_header) throw InputError(source + ": empty file (no header)");
    return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return parse_csv(in, path.string());
}

void write_csv(std::ostream& out, const CsvTable& table) {
    auto put = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    };
    put(table.header);
    for (const auto& r : table.rows) put(r);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) throw IoError("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move output into place at '" + path.string() + "'");
    }
}

void write_telemetry_csv(std::ostream& out, std::span<const TelemetryRecord> records) {
    out << kTelemetryHeader << '\n';
    for (const auto& r : records) {
        out << format_double(r.t) << ',' << format_double(r.cv) << ',' << format_double(r.x) << ','
            << format_double(r.xSensed) << ',' << format_double(r.p1) << ','
            << format_double(r.p1Sensed) << ',' << format_double(r.p2) << ','
            << format_double(r.p2Sensed) << ',' << format_double(r.temp) << ','
            << format_double(r.q) << ',' << format_double(r.qSensed) << ',';
        for (std::size_t i = 0; i < r.activeFaults.size(); ++i) {
            out << (i ? ";" : "") << fault_label(r.activeFaults[i].first);
        }
        out << ',';
        for (std::size_t i = 0; i < r.activeFaults.size(); ++i) {
            out << (i ? ";" : "") << format_double(r.activeFaults[i].second);
        }
        out << '\n';
    }
}

std::string telemetry_csv(std::span<const TelemetryRecord> records) {
    std::ostringstream os;
    write_telemetry_csv(os, records);
    return os.str();
}

}  // namespace greyvalve
