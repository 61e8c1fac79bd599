#pragma once

// Flat key/value config files, TOML-ish subset:
//   # comment
//   [section]            -> keys below get a "section." prefix
//   key = value          -> string ("quoted"), bool (true/false), or number
// No arrays, no nesting, no inline tables. That is all the pipeline needs.

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "gaze2afc/error.hpp"

namespace gaze2afc::config {

class Config {
public:
    Config() = default;

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw InvalidConfig("cannot open config file " + path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return parse(text, path);
    }

    static Config parse(const std::string& text, const std::string& origin = "<config>") {
        Config c;
        std::string section;
        std::size_t line_no = 0, pos = 0;
        while (pos <= text.size()) {
            const std::size_t nl = text.find('\n', pos);
            std::string line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
            pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
            ++line_no;

            const std::size_t hash = find_comment(line);
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;

            if (line.front() == '[') {
                if (line.back() != ']')
                    throw InvalidConfig(origin + ":" + std::to_string(line_no) + ": unterminated section header");
                section = trim(line.substr(1, line.size() - 2));
                if (section.empty())
                    throw InvalidConfig(origin + ":" + std::to_string(line_no) + ": empty section name");
                continue;
            }

            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw InvalidConfig(origin + ":" + std::to_string(line_no) + ": expected key = value");
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                throw InvalidConfig(origin + ":" + std::to_string(line_no) + ": empty key");
            if (!section.empty()) key = section + "." + key;
            if (c.values_.count(key))
                throw InvalidConfig(origin + ":" + std::to_string(line_no) + ": duplicate key " + key);
            c.values_[key] = value;
        }
        return c;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        touch(key);
        return unquote(it->second, key);
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        touch(key);
        if (it->second == "true") return true;
        if (it->second == "false") return false;
        throw InvalidConfig("config key " + key + ": expected true/false, got '" + it->second + "'");
    }

    long get_int(const std::string& key, long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        touch(key);
        long v = 0;
        const char* b = it->second.data();
        const char* e = b + it->second.size();
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec != std::errc{} || p != e)
            throw InvalidConfig("config key " + key + ": expected integer, got '" + it->second + "'");
        return v;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        touch(key);
        double v = 0;
        const char* b = it->second.data();
        const char* e = b + it->second.size();
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec != std::errc{} || p != e)
            throw InvalidConfig("config key " + key + ": expected number, got '" + it->second + "'");
        return v;
    }

    /// Keys present in the file but never read by any get_*. Catches typos.
    std::vector<std::string> unused_keys() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_)
            if (!used_.count(k)) out.push_back(k);
        return out;
    }

    const std::map<std::string, std::string>& raw() const { return values_; }

private:
    static std::string trim(const std::string& s) {
        std::size_t b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        std::size_t e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    // '#' starts a comment unless inside a quoted string.
    static std::size_t find_comment(const std::string& line) {
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) return i;
        }
        return std::string::npos;
    }

    static std::string unquote(const std::string& v, const std::string& key) {
        if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
        if (!v.empty() && (v.front() == '"' || v.back() == '"'))
            throw InvalidConfig("config key " + key + ": unbalanced quotes");
        return v;
    }

    void touch(const std::string& key) const { used_.insert(key); }

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

} // namespace gaze2afc::config
