#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ancreg {

/// Line-oriented "key = value" documents with `[section]` or
/// `[section label]` headers. `#` starts a comment. Lines before the first
/// header belong to an unnamed top-level section.
struct ConfigLine {
    std::size_t number = 0;  // 1-based
    std::string text;        // trimmed, comment stripped
};

struct ConfigSection {
    std::string name;
    std::string label;
    std::size_t header_line = 0;
    std::vector<ConfigLine> lines;

    /// Value of `key = value`; throws ParseError on a duplicate key.
    [[nodiscard]] std::optional<ConfigLine> find(std::string_view key) const;
};

struct ConfigDocument {
    std::vector<ConfigSection> sections;

    [[nodiscard]] const ConfigSection* section(std::string_view name) const;
    [[nodiscard]] std::vector<const ConfigSection*> all(std::string_view name) const;
};

[[nodiscard]] ConfigDocument parse_config(std::string_view text);

[[nodiscard]] std::string trim(std::string_view s);
[[nodiscard]] std::vector<std::string> split_list(std::string_view s, char sep = ',');

/// Splits "key = value" at the first '='; nullopt when there is none.
[[nodiscard]] std::optional<std::pair<std::string, std::string>> split_key_value(std::string_view line);

/// Strict numeric parsing; the whole token must be consumed.
[[nodiscard]] std::optional<double> parse_double(std::string_view s);
[[nodiscard]] std::optional<long long> parse_integer(std::string_view s);

/// Shortest text that parses back to exactly `value`.
[[nodiscard]] std::string format_double(double value);

[[nodiscard]] std::string read_text_file(const std::string& path);

}  // namespace ancreg
