#include "ancreg/config_text.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ancreg/errors.hpp"

namespace ancreg {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s, char sep) {
    std::vector<std::string> out;
    if (trim(s).empty()) {
        return out;
    }
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

std::optional<std::pair<std::string, std::string>> split_key_value(std::string_view line) {
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
        return std::nullopt;
    }
    return std::make_pair(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
}

std::optional<double> parse_double(std::string_view s) {
    const std::string t = trim(s);
    if (t.empty()) {
        return std::nullopt;
    }
    const char* begin = t.data();
    if (*begin == '+') {
        ++begin;
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
        return std::nullopt;
    }
    return value;
}

std::optional<long long> parse_integer(std::string_view s) {
    const std::string t = trim(s);
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        return std::nullopt;
    }
    return value;
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

std::optional<ConfigLine> ConfigSection::find(std::string_view key) const {
    std::optional<ConfigLine> found;
    for (const auto& line : lines) {
        auto kv = split_key_value(line.text);
        if (!kv || kv->first != key) {
            continue;
        }
        if (found) {
            throw ParseError("duplicate key '" + std::string(key) + "'", line.number);
        }
        found = ConfigLine{line.number, kv->second};
    }
    return found;
}

const ConfigSection* ConfigDocument::section(std::string_view name) const {
    const ConfigSection* found = nullptr;
    for (const auto& s : sections) {
        if (s.name == name) {
            if (found) {
                throw ParseError("duplicate section [" + std::string(name) + "]", s.header_line);
            }
            found = &s;
        }
    }
    return found;
}

std::vector<const ConfigSection*> ConfigDocument::all(std::string_view name) const {
    std::vector<const ConfigSection*> out;
    for (const auto& s : sections) {
        if (s.name == name) out.push_back(&s);
    }
    return out;
}

ConfigDocument parse_config(std::string_view text) {
    ConfigDocument doc;
    doc.sections.push_back(ConfigSection{});
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        const auto hash = raw.find('#');
        std::string line = trim(std::string_view(raw).substr(0, hash));
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ParseError("unterminated section header", number);
            }
            const std::string inner = trim(std::string_view(line).substr(1, line.size() - 2));
            const auto space = inner.find_first_of(" \t");
            ConfigSection section;
            section.name = inner.substr(0, space);
            section.label = space == std::string::npos ? std::string() : trim(inner.substr(space));
            section.header_line = number;
            if (section.name.empty()) {
                throw ParseError("empty section name", number);
            }
            doc.sections.push_back(std::move(section));
            continue;
        }
        doc.sections.back().lines.push_back(ConfigLine{number, std::move(line)});
    }
    return doc;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace ancreg
