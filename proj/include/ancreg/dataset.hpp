#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ancreg/sem_model.hpp"

namespace ancreg {

struct Dataset {
    std::vector<std::string> column_names;
    DataMatrix data;
    std::optional<std::string> environment;

    /// Column for a name or a 1-based index; throws InvalidInput otherwise.
    [[nodiscard]] std::size_t column_index(std::string_view key) const;
};

struct CsvOptions {
    bool header = true;
    char delimiter = ',';
    /// Column holding environment labels. It is removed from the data and the
    /// rows are split by label (see ingest_environments).
    std::optional<std::string> env_column;
};

/// Parses CSV text. Without a header, columns are named X1..Xp. Rows and
/// columns in error messages are 1-based file positions.
/// Throws ParseError (malformed or header-only input) and NonFiniteError.
[[nodiscard]] Dataset parse_csv(std::string_view text, const CsvOptions& options = {});
[[nodiscard]] Dataset ingest_csv(const std::string& path, const CsvOptions& options = {});

/// Like parse_csv, but splits the rows on `options.env_column`; environments
/// appear in order of first occurrence. Without an env column the whole file
/// is one environment.
[[nodiscard]] std::vector<Dataset> parse_environments(std::string_view text, const CsvOptions& options);
[[nodiscard]] std::vector<Dataset> ingest_environments(const std::string& path, const CsvOptions& options);

/// Header line plus one line per row, numbers in shortest round-trip form.
/// An environment column is appended when `env_column` is given and the
/// dataset carries an environment label.
[[nodiscard]] std::string format_csv(const Dataset& dataset, const std::optional<std::string>& env_column = {});

/// Column names of a spec: its own names or X1..Xp.
[[nodiscard]] std::vector<std::string> column_names(const SemSpec& spec);

}  // namespace ancreg
