#include "ancreg/study_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "ancreg/config_text.hpp"
#include "ancreg/errors.hpp"
#include "ancreg/sem_io.hpp"

namespace ancreg {

namespace {

const std::string& value_of(const ConfigLine& line) { return line.text; }

std::size_t parse_count(const ConfigLine& line, const char* what) {
    const auto v = parse_integer(value_of(line));
    if (!v || *v < 0) throw ParseError(std::string(what) + " must be a nonnegative integer", line.number);
    return static_cast<std::size_t>(*v);
}

double parse_real(const std::string& token, std::size_t line, const char* what) {
    const auto v = parse_double(token);
    if (!v) throw ParseError(std::string(what) + " is not a number: '" + token + "'", line);
    return *v;
}

bool parse_bool(const ConfigLine& line) {
    const std::string v = value_of(line);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ParseError("expected true or false", line.number);
}

const char* kStudyKeys[] = {"kind", "target", "sample_sizes", "runs", "alphas", "reference_alpha",
                            "f", "seed", "threads", "cap", "center"};

}  // namespace

std::size_t resolve_node(const SemSpec& spec, std::string_view key) {
    for (std::size_t j = 0; j < spec.p(); ++j) {
        if (spec.name(j) == key) return j;
    }
    if (const auto v = parse_integer(key); v && *v >= 1 && static_cast<std::size_t>(*v) <= spec.p()) {
        return static_cast<std::size_t>(*v - 1);
    }
    throw InvalidInput("no node '" + std::string(key) + "' in the model");
}

std::vector<StudyConfig> parse_study_configs(std::string_view text, const std::string& base_dir) {
    const ConfigDocument doc = parse_config(text);
    const ConfigSection* study = doc.section("study");
    if (!study) throw ParseError("missing [study] section");
    for (const auto& line : study->lines) {
        const auto kv = split_key_value(line.text);
        if (!kv) throw ParseError("expected 'key = value'", line.number);
        if (std::find(std::begin(kStudyKeys), std::end(kStudyKeys), kv->first) == std::end(kStudyKeys)) {
            throw ParseError("unknown study key '" + kv->first + "'", line.number);
        }
    }

    StudyConfig base;
    std::optional<std::string> target_key;
    if (auto line = study->find("kind")) {
        const std::string v = value_of(*line);
        if (v == "ancestor") base.kind = StudyKind::Ancestor;
        else if (v == "graph") base.kind = StudyKind::Graph;
        else throw ParseError("kind must be 'ancestor' or 'graph'", line->number);
    }
    if (auto line = study->find("target")) target_key = value_of(*line);
    if (auto line = study->find("sample_sizes")) {
        for (const auto& token : split_list(value_of(*line))) {
            const auto v = parse_double(token);
            if (!v || *v < 1 || *v != std::floor(*v)) {
                throw ParseError("sample size must be a positive integer: '" + token + "'", line->number);
            }
            base.sample_sizes.push_back(static_cast<std::size_t>(*v));
        }
    }
    if (auto line = study->find("runs")) base.runs = parse_count(*line, "runs");
    if (auto line = study->find("alphas")) {
        const std::string v = value_of(*line);
        if (v != "default") {
            for (const auto& token : split_list(v)) base.alphas.push_back(parse_real(token, line->number, "alpha"));
        }
    }
    if (auto line = study->find("reference_alpha")) {
        base.reference_alpha = parse_real(value_of(*line), line->number, "reference_alpha");
    }
    if (auto line = study->find("f")) base.f = parse_nonlinearity(value_of(*line));
    if (auto line = study->find("seed")) base.seed = parse_count(*line, "seed");
    if (auto line = study->find("threads")) base.threads = static_cast<unsigned>(parse_count(*line, "threads"));
    if (auto line = study->find("cap")) base.cap = parse_bool(*line);
    if (auto line = study->find("center")) base.center = parse_bool(*line);

    std::vector<StudyConfig> out;
    for (const ConfigSection* scenario : doc.all("scenario")) {
        StudyConfig config = base;
        config.scenario = scenario->label.empty() ? "default" : scenario->label;
        for (const auto& line : scenario->lines) {
            const auto kv = split_key_value(line.text);
            if (!kv || (kv->first != "builtin" && kv->first != "spec")) {
                throw ParseError("scenario sections take only 'builtin' or 'spec'", line.number);
            }
        }
        const auto builtin = scenario->find("builtin");
        const auto spec = scenario->find("spec");
        if (builtin.has_value() == spec.has_value()) {
            throw ParseError("scenario needs exactly one of 'builtin' or 'spec'", scenario->header_line);
        }
        if (builtin) {
            config.spec = builtin_spec(value_of(*builtin));
        } else {
            std::filesystem::path path(value_of(*spec));
            if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
            config.spec = load_sem_spec(path.string());
        }
        if (target_key) config.target = resolve_node(config.spec, *target_key);
        try {
            config.validate();
        } catch (const InvalidInput& e) {
            throw ParseError(std::string("invalid study: ") + e.what(), scenario->header_line);
        }
        out.push_back(std::move(config));
    }
    if (out.empty()) throw ParseError("no [scenario] section");
    return out;
}

std::vector<StudyConfig> load_study_configs(const std::string& path) {
    const std::filesystem::path p(path);
    return parse_study_configs(read_text_file(path), p.has_parent_path() ? p.parent_path().string() : ".");
}

}  // namespace ancreg
