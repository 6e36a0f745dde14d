#pragma once

// Named equal-length numeric columns with string metadata, serialized as
// CSV (RFC 4180 quoting, %.17g) or JSON {columns: {...}, metadata: {...}}.

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core.hpp"

namespace selective {

struct CurveTable {
    std::vector<std::pair<std::string, std::vector<double>>> columns;  // insertion order
    std::map<std::string, std::string> metadata;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().second.size(); }

    void add_column(std::string name, std::vector<double> values) {
        if (!columns.empty() && values.size() != rows()) {
            throw DimensionMismatch("curve table: column '" + name + "' has " +
                                    std::to_string(values.size()) + " rows, expected " +
                                    std::to_string(rows()));
        }
        for (const auto& c : columns) {
            if (c.first == name) throw InvalidSpec("curve table: duplicate column '" + name + "'");
        }
        columns.emplace_back(std::move(name), std::move(values));
    }

    const std::vector<double>& column(const std::string& name) const {
        for (const auto& c : columns) {
            if (c.first == name) return c.second;
        }
        throw InvalidSpec("curve table: no column '" + name + "'");
    }

    bool has_column(const std::string& name) const {
        for (const auto& c : columns) {
            if (c.first == name) return true;
        }
        return false;
    }

    // Appends every column of `other`, prefixing names.
    void append(const CurveTable& other, const std::string& prefix) {
        for (const auto& [name, values] : other.columns) add_column(prefix + name, values);
        for (const auto& [k, v] : other.metadata) metadata[prefix + k] = v;
    }

    // Stacks the rows of `other`; both tables must have the same column names
    // in the same order.
    void append_rows(const CurveTable& other) {
        if (columns.empty()) {
            columns = other.columns;
            return;
        }
        if (other.columns.size() != columns.size()) throw DimensionMismatch("curve table: column sets differ");
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (columns[c].first != other.columns[c].first) {
                throw DimensionMismatch("curve table: column '" + other.columns[c].first + "' out of place");
            }
            auto& dst = columns[c].second;
            dst.insert(dst.end(), other.columns[c].second.begin(), other.columns[c].second.end());
        }
    }

    void validate() const {
        const std::size_t n = rows();
        for (const auto& [name, values] : columns) {
            if (values.size() != n) throw DimensionMismatch("curve table: ragged column '" + name + "'");
            for (double v : values) {
                if (!std::isfinite(v)) throw NonFiniteInput("curve table: non-finite value in '" + name + "'");
            }
        }
    }
};

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline void write_csv(const CurveTable& table, std::ostream& os) {
    table.validate();
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) os << ',';
        os << csv_quote(table.columns[c].first);
    }
    os << '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c) os << ',';
            os << format_double(table.columns[c].second[r]);
        }
        os << '\n';
    }
}

inline nlohmann::ordered_json to_json(const CurveTable& table) {
    table.validate();
    nlohmann::ordered_json doc;
    doc["columns"] = nlohmann::ordered_json::object();
    for (const auto& [name, values] : table.columns) doc["columns"][name] = values;
    doc["metadata"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : table.metadata) doc["metadata"][k] = v;
    return doc;
}

inline void write_json(const CurveTable& table, std::ostream& os) { os << to_json(table).dump(2) << '\n'; }

namespace detail {

// Splits one CSV record, honoring double-quoted fields.
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

}  // namespace detail

// Reads a numeric CSV with a header row into a CurveTable.
inline CurveTable read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw InvalidSpec("csv: missing header row");
    const auto header = detail::split_csv_line(line);
    std::vector<std::vector<double>> cols(header.size());
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size()) {
            throw DimensionMismatch("csv: line " + std::to_string(lineno) + " has " +
                                    std::to_string(fields.size()) + " fields, expected " +
                                    std::to_string(header.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(fields[c], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != fields[c].size()) {
                throw InvalidSpec("csv: line " + std::to_string(lineno) + " column '" + header[c] +
                                  "' is not a number");
            }
            cols[c].push_back(v);
        }
    }
    CurveTable t;
    for (std::size_t c = 0; c < header.size(); ++c) t.add_column(header[c], std::move(cols[c]));
    return t;
}

}  // namespace selective
