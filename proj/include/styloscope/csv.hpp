#pragma once

// Minimal RFC-4180 CSV reading and writing (CRLF records, quoted fields when a
// field contains a comma, quote or line break). Reading accepts LF or CRLF.

#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "styloscope/error.hpp"

namespace styloscope::csv {

using Row = std::vector<std::string>;

/// Shortest decimal text that parses back to exactly `value`.
inline std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw Error("format_double: conversion failed");
    return std::string(buf, end);
}

inline double parse_double(std::string_view text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw InputError("not a number: '" + std::string(text) + "'");
    }
    return value;
}

inline std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline void write_row(std::ostream& out, const Row& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ',';
        out << quote(row[i]);
    }
    out << "\r\n";
}

/// Reads every record of `in`. Throws InputError on an unterminated quote.
inline std::vector<Row> read_all(std::istream& in) {
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    char c;
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };
    while (in.get(c)) {
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                field_started = true;
                break;
            case ',':
                end_field();
                field_started = true;
                break;
            case '\r':
                if (in.peek() == '\n') in.get(c);
                end_row();
                break;
            case '\n':
                end_row();
                break;
            default:
                field += c;
                field_started = true;
        }
    }
    if (in_quotes) throw InputError("csv: unterminated quoted field");
    if (field_started || !row.empty()) end_row();
    return rows;
}

}  // namespace styloscope::csv
