#pragma once

#include <string>
#include <string_view>

#include "ancreg/config_text.hpp"
#include "ancreg/sem_model.hpp"

namespace ancreg {

/// Reads the model file format:
///
///     p = 3
///     names = A, B, C          # optional
///     [edges]
///     1 -> 2 : 0.8             # endpoints are 1-based indices or names
///     [noise]
///     node 1: uniform, 1.0
///     node 2: student_t(8), 0.5
///     default: gaussian, 1.0   # optional fallback for unlisted nodes
///
/// The result is validated, including acyclicity (CycleError) unless
/// `require_dag` is false.
[[nodiscard]] SemSpec parse_sem_spec(std::string_view text, bool require_dag = true);
[[nodiscard]] SemSpec load_sem_spec(const std::string& path, bool require_dag = true);

/// Builds a spec from an already tokenized document; the top-level section
/// holds `p`/`names`, `[edges]` and `[noise]` hold the rest.
[[nodiscard]] SemSpec sem_spec_from_config(const ConfigDocument& doc, bool require_dag = true);

/// Writes every node's noise explicitly; numbers use the shortest exact form,
/// so parse_sem_spec(format_sem_spec(s)) == s.
[[nodiscard]] std::string format_sem_spec(const SemSpec& spec);

/// Parses a noise entry such as "laplace, 0.5".
[[nodiscard]] NoiseSpec parse_noise(std::string_view text, std::size_t line = 0);

}  // namespace ancreg
