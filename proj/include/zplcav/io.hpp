#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "zplcav/errors.hpp"
#include "zplcav/spectrum.hpp"

namespace zplcav {

// Every floating-point value leaving the tool goes through here.
inline constexpr int kSignificantDigits = 9;

inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", kSignificantDigits, x);
    return buf;
}

// Value as it will read back from its 9-digit text form. Used before handing
// numbers to the JSON writer so its shortest round-trip output has <= 9 digits.
inline double round_significant(double x) {
    if (!std::isfinite(x)) return x;
    return std::strtod(format_number(x).c_str(), nullptr);
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw DomainError("csv: no column '" + name + "'");
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        const auto a = cell.find_first_not_of(" \t\r");
        const auto b = cell.find_last_not_of(" \t\r");
        out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace detail

// Raw CSV cells with a mandatory header row. Blank lines are skipped.
struct CsvText {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline CsvText parse_csv_text(std::istream& in, const std::string& origin = "csv") {
    CsvText t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto cells = detail::split_csv_line(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
            throw DomainError(origin + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(t.header.size()) + " columns, got " + std::to_string(cells.size()));
        t.rows.push_back(std::move(cells));
    }
    if (t.header.empty()) throw DomainError(origin + ": missing header row");
    return t;
}

// Numeric CSV.
inline CsvTable parse_csv(std::istream& in, const std::string& origin = "csv") {
    const auto text = parse_csv_text(in, origin);
    CsvTable t{text.header, {}};
    for (std::size_t r = 0; r < text.rows.size(); ++r) {
        std::vector<double> row;
        for (const auto& c : text.rows[r]) {
            char* end = nullptr;
            const double v = std::strtod(c.c_str(), &end);
            if (c.empty() || *end != '\0')
                throw DomainError(origin + ": data row " + std::to_string(r + 1) + ": not a number: '" + c + "'");
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path.string());
    return parse_csv(in, path.string());
}

inline void write_csv(std::ostream& out, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_number(r[i]);
        out << '\n';
    }
}

inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write " + path.string());
    write_csv(out, header, rows);
}

// `wavelength_nm,density`, ascending.
inline SampledSpectrum read_spectrum(const std::filesystem::path& path) {
    const auto t = read_csv(path);
    const auto wl = t.column("wavelength_nm"), d = t.column("density");
    std::vector<double> w, v;
    for (const auto& r : t.rows) {
        w.push_back(r[wl]);
        v.push_back(r[d]);
    }
    return SampledSpectrum(std::move(w), std::move(v));
}

inline void write_spectrum(const std::filesystem::path& path, const SampledSpectrum& s) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < s.wavelengths().size(); ++i) rows.push_back({s.wavelengths()[i], s.density()[i]});
    write_csv(path, {"wavelength_nm", "density"}, rows);
}

} // namespace zplcav
