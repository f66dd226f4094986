#include "ancreg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ancreg/config_text.hpp"
#include "ancreg/errors.hpp"

namespace ancreg {

namespace {

struct RawTable {
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> cells;
    std::vector<std::size_t> line_numbers;
};

std::string unquote(std::string s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

std::vector<std::string> split_row(std::string_view line, char delimiter) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t end = line.find(delimiter, start);
        out.push_back(unquote(trim(line.substr(start, end == std::string_view::npos ? end : end - start))));
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

RawTable read_table(std::string_view text, const CsvOptions& options) {
    RawTable table;
    std::size_t number = 0;
    std::size_t pos = 0;
    bool have_header = !options.header;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++number;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) continue;
        auto fields = split_row(line, options.delimiter);
        if (!have_header) {
            table.names = std::move(fields);
            have_header = true;
            continue;
        }
        if (table.names.empty()) {
            for (std::size_t c = 0; c < fields.size(); ++c) table.names.push_back("X" + std::to_string(c + 1));
        }
        if (fields.size() != table.names.size()) {
            throw ParseError("expected " + std::to_string(table.names.size()) + " fields, found " +
                                 std::to_string(fields.size()),
                             number, std::min(fields.size(), table.names.size()) + 1);
        }
        table.cells.push_back(std::move(fields));
        table.line_numbers.push_back(number);
    }
    if (table.cells.empty()) {
        throw ParseError("no data rows");
    }
    return table;
}

Dataset build(const RawTable& table, const std::vector<std::size_t>& rows, std::optional<std::size_t> skip,
              std::optional<std::string> environment) {
    Dataset out;
    for (std::size_t c = 0; c < table.names.size(); ++c) {
        if (c != skip) out.column_names.push_back(table.names[c]);
    }
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(out.column_names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& fields = table.cells[rows[r]];
        Eigen::Index col = 0;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (c == skip) continue;
            const auto value = parse_double(fields[c]);
            const std::size_t line = table.line_numbers[rows[r]];
            if (!value) {
                throw ParseError("not a number: '" + fields[c] + "'", line, c + 1);
            }
            if (!std::isfinite(*value)) {
                throw NonFiniteError("non-finite value '" + fields[c] + "'", line, c + 1);
            }
            values(static_cast<Eigen::Index>(r), col++) = *value;
        }
    }
    out.data = DataMatrix(std::move(values));
    out.environment = std::move(environment);
    return out;
}

std::optional<std::size_t> env_index(const RawTable& table, const CsvOptions& options) {
    if (!options.env_column) return std::nullopt;
    const auto it = std::find(table.names.begin(), table.names.end(), *options.env_column);
    if (it == table.names.end()) {
        throw InvalidInput("environment column '" + *options.env_column + "' not found");
    }
    return static_cast<std::size_t>(it - table.names.begin());
}

std::vector<std::size_t> all_rows(const RawTable& table) {
    std::vector<std::size_t> rows(table.cells.size());
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
    return rows;
}

}  // namespace

std::size_t Dataset::column_index(std::string_view key) const {
    const auto it = std::find(column_names.begin(), column_names.end(), key);
    if (it != column_names.end()) {
        return static_cast<std::size_t>(it - column_names.begin());
    }
    if (const auto index = parse_integer(key); index && *index >= 1 &&
                                               static_cast<std::size_t>(*index) <= column_names.size()) {
        return static_cast<std::size_t>(*index - 1);
    }
    throw InvalidInput("no column '" + std::string(key) + "'");
}

Dataset parse_csv(std::string_view text, const CsvOptions& options) {
    const RawTable table = read_table(text, options);
    return build(table, all_rows(table), env_index(table, options), std::nullopt);
}

Dataset ingest_csv(const std::string& path, const CsvOptions& options) {
    return parse_csv(read_text_file(path), options);
}

std::vector<Dataset> parse_environments(std::string_view text, const CsvOptions& options) {
    const RawTable table = read_table(text, options);
    const auto env = env_index(table, options);
    if (!env) {
        return {build(table, all_rows(table), std::nullopt, std::nullopt)};
    }
    std::vector<std::string> labels;
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t r = 0; r < table.cells.size(); ++r) {
        const std::string& label = table.cells[r][*env];
        auto [it, inserted] = groups.try_emplace(label);
        if (inserted) labels.push_back(label);
        it->second.push_back(r);
    }
    std::vector<Dataset> out;
    for (const auto& label : labels) {
        out.push_back(build(table, groups[label], env, label));
    }
    return out;
}

std::vector<Dataset> ingest_environments(const std::string& path, const CsvOptions& options) {
    return parse_environments(read_text_file(path), options);
}

std::string format_csv(const Dataset& dataset, const std::optional<std::string>& env_column) {
    const bool with_env = env_column && dataset.environment;
    std::string out;
    for (std::size_t c = 0; c < dataset.column_names.size(); ++c) {
        if (c) out += ',';
        out += dataset.column_names[c];
    }
    if (with_env) out += ',' + *env_column;
    out += '\n';
    const auto& values = dataset.data.values();
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            if (c) out += ',';
            out += format_double(values(r, c));
        }
        if (with_env) out += ',' + *dataset.environment;
        out += '\n';
    }
    return out;
}

std::vector<std::string> column_names(const SemSpec& spec) {
    std::vector<std::string> out;
    for (std::size_t j = 0; j < spec.p(); ++j) out.push_back(spec.name(j));
    return out;
}

}  // namespace ancreg
