#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "osc/error.hpp"

namespace osc {

/// Flat key=value parameters with typed, defaulted access. Keys that are
/// never read are reported by `unused`.
class Params {
public:
    Params() = default;
    explicit Params(std::map<std::string, std::string> values) : values_(std::move(values)) {}

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string text(const std::string& key, const std::string& fallback) const {
        const auto it = lookup(key);
        return it ? *it : fallback;
    }

    double number(const std::string& key, double fallback) const {
        const auto it = lookup(key);
        return it ? parse_number(key, *it) : fallback;
    }

    std::size_t count(const std::string& key, std::size_t fallback) const {
        const double v = number(key, static_cast<double>(fallback));
        if (v < 0.0 || std::floor(v) != v) {
            throw InvalidParameters("parameter '" + key + "' must be a nonnegative integer");
        }
        return static_cast<std::size_t>(v);
    }

    std::vector<double> list(const std::string& key, std::vector<double> fallback) const {
        const auto it = lookup(key);
        if (!it) {
            return fallback;
        }
        std::string s = *it;
        s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '[' || c == ']' || c == ' '; }), s.end());
        std::vector<double> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) {
                out.push_back(parse_number(key, item));
            }
        }
        if (out.empty()) {
            throw InvalidParameters("parameter '" + key + "' is an empty list");
        }
        return out;
    }

    std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> fallback) const {
        std::vector<double> d(fallback.begin(), fallback.end());
        std::vector<std::size_t> out;
        for (const double v : list(key, d)) {
            if (v < 0.0 || std::floor(v) != v) {
                throw InvalidParameters("parameter '" + key + "' must list nonnegative integers");
            }
            out.push_back(static_cast<std::size_t>(v));
        }
        return out;
    }

    std::vector<std::string> unused() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_) {
            if (!read_.count(k)) {
                out.push_back(k);
            }
        }
        return out;
    }

private:
    const std::string* lookup(const std::string& key) const {
        read_.insert(key);
        const auto it = values_.find(key);
        return it == values_.end() ? nullptr : &it->second;
    }

    static double parse_number(const std::string& key, const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used == s.size()) {
                return v;
            }
        } catch (const std::exception&) {
        }
        throw InvalidParameters("parameter '" + key + "' has non-numeric value '" + s + "'");
    }

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> read_;
};

}  // namespace osc
