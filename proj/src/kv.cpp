// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include "bvscan/kv.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace bvscan::kv {

std::optional<std::string> Record::find(const std::string& key) const {
    for (const auto& [k, v] : fields) {
        if (k == key) {
            return v;
        }
    }
    return std::nullopt;
}

std::string Record::get(const std::string& key) const {
    auto v = find(key);
    if (!v) {
        throw error("missing field '" + key + "'");
    }
    return *v;
}

uint64_t Record::get_uint(const std::string& key) const {
    const std::string text = get(key);
    uint64_t value = 0;
    const bool hex = text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X');
    const char* first = text.data() + (hex ? 2 : 0);
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value, hex ? 16 : 10);
    if (ec != std::errc() || ptr != last || first == last) {
        throw error("field '" + key + "' is not an unsigned number: " + text);
    }
    return value;
}

namespace {

bool is_key_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-' || c == '.'; }

} // namespace

std::vector<Record> parse(const std::string& text, const std::string& source) {
    std::vector<Record> out;
    std::istringstream in(text);
    std::string line;
    size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        Record rec{.source = source, .line = number};
        size_t i = 0;
        const auto fail = [&](const std::string& msg) { return FormatError(source, number, msg); };
        while (true) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])) != 0) {
                ++i;
            }
            if (i >= line.size() || line[i] == '#') {
                break;
            }
            const size_t key_start = i;
            while (i < line.size() && is_key_char(line[i])) {
                ++i;
            }
            if (i == key_start || i >= line.size() || line[i] != '=') {
                throw fail("expected key=value at column " + std::to_string(key_start + 1));
            }
            std::string key = line.substr(key_start, i - key_start);
            ++i;
            std::string value;
            if (i < line.size() && line[i] == '"') {
                ++i;
                bool closed = false;
                while (i < line.size()) {
                    const char c = line[i++];
                    if (c == '"') {
                        closed = true;
                        break;
                    }
                    if (c == '\\' && i < line.size()) {
                        value += line[i++];
                    } else {
                        value += c;
                    }
                }
                if (!closed) {
                    throw fail("unterminated quoted value for '" + key + "'");
                }
                if (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])) == 0) {
                    throw fail("expected whitespace after quoted value for '" + key + "'");
                }
            } else {
                while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])) == 0) {
                    value += line[i++];
                }
            }
            if (rec.has(key)) {
                throw fail("duplicate field '" + key + "'");
            }
            rec.fields.emplace_back(std::move(key), std::move(value));
        }
        if (!rec.fields.empty()) {
            out.push_back(std::move(rec));
        }
    }
    return out;
}

std::vector<Record> parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw FormatError(path, 0, "cannot open file");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

std::string format(const std::vector<std::pair<std::string, std::string>>& fields) {
    std::string out;
    for (const auto& [key, value] : fields) {
        if (!out.empty()) {
            out += ' ';
        }
        out += key + '=';
        const bool plain = !value.empty() && value.find_first_of(" \t\"\\#") == std::string::npos;
        if (plain) {
            out += value;
            continue;
        }
        out += '"';
        for (const char c : value) {
            if (c == '"' || c == '\\') {
                out += '\\';
            }
            out += c;
        }
        out += '"';
    }
    return out;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

} // namespace bvscan::kv
