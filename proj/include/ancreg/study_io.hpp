#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ancreg/experiments.hpp"

namespace ancreg {

/// Study files:
///
///     [study]
///     kind = ancestor            # or graph
///     target = 4                 # 1-based index or node name; ancestor studies
///     sample_sizes = 100, 1000, 10000
///     runs = 200
///     alphas = default           # or an ascending list
///     reference_alpha = 0.05
///     f = cube
///     seed = 1
///     threads = 1
///     cap = false
///     center = true
///
///     [scenario one_gaussian]
///     builtin = reference   # or: spec = path/to/model.sem
///
/// One StudyConfig per scenario, in file order. `spec` paths are resolved
/// relative to `base_dir`. Every config is validated.
[[nodiscard]] std::vector<StudyConfig> parse_study_configs(std::string_view text, const std::string& base_dir = ".");
[[nodiscard]] std::vector<StudyConfig> load_study_configs(const std::string& path);

/// Node for a 1-based index or a name of the spec; throws InvalidInput.
[[nodiscard]] std::size_t resolve_node(const SemSpec& spec, std::string_view key);

}  // namespace ancreg
