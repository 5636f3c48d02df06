// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#pragma once

// Line-oriented key=value records, shared by fixture manifests, policy
// inputs and the decision log:
//
//   # comment
//   type=expect kind=MulOverflow line=7 verdict=sat
//   note="value with spaces"
//
// Values are bare words or double-quoted strings with \" and \\ escapes.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bvscan::kv {

class FormatError : public std::runtime_error {
  public:
    FormatError(const std::string& source, size_t line, const std::string& message)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}
    [[nodiscard]] size_t line() const { return line_; }

  private:
    size_t line_;
};

struct Record {
    std::vector<std::pair<std::string, std::string>> fields; // in written order
    std::string source;
    size_t line = 0;

    [[nodiscard]] std::optional<std::string> find(const std::string& key) const;
    /// Throws FormatError naming the record when the key is missing.
    [[nodiscard]] std::string get(const std::string& key) const;
    [[nodiscard]] uint64_t get_uint(const std::string& key) const;
    [[nodiscard]] bool has(const std::string& key) const { return find(key).has_value(); }
    [[nodiscard]] FormatError error(const std::string& message) const { return {source, line, message}; }
};

/// Blank and comment-only lines produce no record. Duplicate keys in one
/// record are an error.
std::vector<Record> parse(const std::string& text, const std::string& source = "<input>");
std::vector<Record> parse_file(const std::string& path);

/// One record line; values that need it are quoted.
std::string format(const std::vector<std::pair<std::string, std::string>>& fields);

/// Splits a comma-separated list, dropping empty items.
std::vector<std::string> split_list(const std::string& value);

} // namespace bvscan::kv
