#pragma once

#include <cctype>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fleetmine/error.hpp"

namespace fleetmine::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows; // data rows, header excluded
};

// RFC 4180 style: quoted fields may contain commas, doubled quotes, and
// newlines. CRLF input is accepted.
inline Table parse(std::string_view text) {
    Table table;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool row_has_content = false;

    const auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
    };
    const auto end_row = [&] {
        end_field();
        if (table.header.empty())
            table.header = std::move(row);
        else
            table.rows.push_back(std::move(row));
        row.clear();
        row_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            in_quotes = true;
            row_has_content = true;
            break;
        case ',':
            end_field();
            row_has_content = true;
            break;
        case '\r':
            break;
        case '\n':
            if (row_has_content || !field.empty() || !row.empty()) end_row();
            break;
        default:
            field.push_back(c);
            row_has_content = true;
        }
    }
    if (in_quotes) throw ParseError("unterminated quoted field");
    if (row_has_content || !field.empty() || !row.empty()) end_row();
    return table;
}

inline Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse(text);
}

// Header matching is case-insensitive and ignores spaces and punctuation,
// so "Unit#", "unit #" and "UNIT" all collapse to "unit".
inline std::string normalize_header(std::string_view name) {
    std::string out;
    for (char c : name)
        if (std::isalnum(static_cast<unsigned char>(c)))
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

// First column whose normalized name matches any alias; aliases are given
// pre-normalized.
inline std::optional<std::size_t> find_column(const std::vector<std::string>& header,
                                              std::initializer_list<std::string_view> aliases) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string norm = normalize_header(header[i]);
        for (auto alias : aliases)
            if (norm == alias) return i;
    }
    return std::nullopt;
}

inline std::string quote_field(std::string_view field) {
    const bool needs = field.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

inline void write_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << quote_field(fields[i]);
    }
    os << '\n';
}

} // namespace fleetmine::csv
