#pragma once

// Minimal RFC-4180 reading/writing plus atomic file replacement.

#include <charconv>
#include <cstdio>
#include <system_error>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "osc/error.hpp"

namespace osc::csv {

/// Shortest text that round-trips a double exactly (17 significant digits).
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

struct Record {
    std::size_t line = 0;  ///< 1-based line on which the record starts
    std::vector<std::string> fields;
};

/// Splits RFC-4180 text into records. Quoted fields may hold commas, quotes
/// and line breaks. Empty lines are skipped.
inline std::vector<Record> parse(std::string_view text, const std::string& source = "<memory>") {
    std::vector<Record> records;
    Record cur;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    cur.line = 1;

    auto end_field = [&] {
        cur.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        if (!(cur.fields.empty() && !field_started && field.empty())) {
            end_field();
            records.push_back(std::move(cur));
        }
        cur = Record{};
        cur.line = line;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') {
                    ++line;
                }
                field += c;
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field.empty()) {
                throw ParseError(source, line, "quote inside unquoted field");
            }
            in_quotes = true;
            field_started = true;
            break;
        case ',':
            field_started = true;
            end_field();
            field_started = true;
            break;
        case '\r':
            break;
        case '\n':
            ++line;
            end_record();
            break;
        default:
            field_started = true;
            field += c;
        }
    }
    if (in_quotes) {
        throw ParseError(source, line, "unterminated quoted field");
    }
    end_record();
    return records;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string() + " for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes `content` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partially written file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open " + tmp.string() + " for writing");
        }
        out << content;
        out.flush();
        if (!out) {
            throw IoError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place at " + path.string());
    }
}

inline double parse_double(const std::string& s, const std::string& source, std::size_t line) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && (*first == ' ' || *first == '\t')) {
        ++first;
    }
    while (last > first && (last[-1] == ' ' || last[-1] == '\t')) {
        --last;
    }
    if (first < last && *first == '+') {
        ++first;
    }
    double v = 0.0;
    const auto [end, ec] = std::from_chars(first, last, v);
    if (first == last || end != last || ec != std::errc{}) {
        throw ParseError(source, line, "non-numeric cell '" + s + "'");
    }
    return v;
}

}  // namespace osc::csv
