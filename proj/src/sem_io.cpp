#include "ancreg/sem_io.hpp"

#include <cmath>
#include <optional>
#include <sstream>

#include "ancreg/errors.hpp"

namespace ancreg {

namespace {

std::size_t resolve_node(const std::string& token, const std::vector<std::string>& names, std::size_t p,
                         std::size_t line) {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == token) {
            return i;
        }
    }
    if (auto idx = parse_integer(token); idx && *idx >= 1 && static_cast<std::size_t>(*idx) <= p) {
        return static_cast<std::size_t>(*idx - 1);
    }
    throw ParseError("unknown node '" + token + "'", line);
}

}  // namespace

NoiseSpec parse_noise(std::string_view text, std::size_t line) {
    const auto parts = split_list(text);
    if (parts.size() != 2) {
        throw ParseError("noise entry must be 'family, sigma'", line);
    }
    const auto sigma = parse_double(parts[1]);
    if (!sigma) {
        throw ParseError("noise sigma is not a number: '" + parts[1] + "'", line);
    }
    const std::string& family = parts[0];
    NoiseSpec noise;
    if (family == "gaussian") {
        noise = NoiseSpec::gaussian(*sigma);
    } else if (family == "uniform") {
        noise = NoiseSpec::uniform(*sigma);
    } else if (family == "laplace") {
        noise = NoiseSpec::laplace(*sigma);
    } else if (family == "shifted_exponential") {
        noise = NoiseSpec::shifted_exponential(*sigma);
    } else if (family.starts_with("student_t(") && family.ends_with(")")) {
        const auto df = parse_double(std::string_view(family).substr(10, family.size() - 11));
        if (!df) {
            throw ParseError("student_t degrees of freedom must be a number", line);
        }
        noise = NoiseSpec::student_t(*df, *sigma);
    } else {
        throw ParseError("unknown noise family '" + family + "'", line);
    }
    try {
        noise.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), line);
    }
    return noise;
}

SemSpec sem_spec_from_config(const ConfigDocument& doc, bool require_dag) {
    const ConfigSection& top = doc.sections.front();
    std::optional<std::size_t> p;
    std::vector<std::string> names;
    for (const auto* section : {&top, doc.section("model")}) {
        if (section == nullptr) continue;
        if (auto line = section->find("p")) {
            const auto value = parse_integer(line->text);
            if (!value || *value < 1) {
                throw ParseError("p must be a positive integer", line->number);
            }
            p = static_cast<std::size_t>(*value);
        }
        if (auto line = section->find("names")) {
            names = split_list(line->text);
        }
    }
    if (!p) {
        throw ParseError("missing 'p = <node count>'");
    }
    if (!names.empty() && names.size() != *p) {
        throw ParseError("names must list exactly p entries");
    }
    SemSpec spec(*p);
    spec.names = names;

    if (const auto* edges = doc.section("edges")) {
        for (const auto& line : edges->lines) {
            const auto arrow = line.text.find("->");
            const auto colon = line.text.rfind(':');
            if (arrow == std::string::npos || colon == std::string::npos || colon < arrow) {
                throw ParseError("edge must read 'from -> to : weight'", line.number);
            }
            const std::size_t from = resolve_node(trim(line.text.substr(0, arrow)), names, *p, line.number);
            const std::size_t to =
                resolve_node(trim(line.text.substr(arrow + 2, colon - arrow - 2)), names, *p, line.number);
            const auto weight = parse_double(line.text.substr(colon + 1));
            if (!weight || !std::isfinite(*weight)) {
                throw ParseError("edge weight is not a finite number", line.number);
            }
            if (from == to) {
                throw ParseError("self loop", line.number);
            }
            if (spec.theta(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) != 0.0) {
                throw ParseError("duplicate edge", line.number);
            }
            spec.add_edge(from, to, *weight);
        }
    }

    std::vector<bool> seen(*p, false);
    std::optional<NoiseSpec> fallback;
    if (const auto* noise = doc.section("noise")) {
        for (const auto& line : noise->lines) {
            const auto colon = line.text.find(':');
            if (colon == std::string::npos) {
                throw ParseError("noise entry must read 'node <id>: family, sigma'", line.number);
            }
            const std::string head = trim(line.text.substr(0, colon));
            const NoiseSpec parsed = parse_noise(line.text.substr(colon + 1), line.number);
            if (head == "default") {
                fallback = parsed;
                continue;
            }
            if (!head.starts_with("node ")) {
                throw ParseError("noise entry must start with 'node' or 'default'", line.number);
            }
            const std::size_t node = resolve_node(trim(head.substr(5)), names, *p, line.number);
            if (seen[node]) {
                throw ParseError("duplicate noise entry for node " + std::to_string(node + 1), line.number);
            }
            seen[node] = true;
            spec.noise[node] = parsed;
        }
    }
    for (std::size_t j = 0; j < *p; ++j) {
        if (!seen[j]) {
            if (!fallback) {
                throw ParseError("no noise given for node " + std::to_string(j + 1) + " and no default");
            }
            spec.noise[j] = *fallback;
        }
    }
    if (require_dag) (void)validate_dag(spec.theta);
    return spec;
}

SemSpec parse_sem_spec(std::string_view text, bool require_dag) {
    return sem_spec_from_config(parse_config(text), require_dag);
}

SemSpec load_sem_spec(const std::string& path, bool require_dag) {
    return parse_sem_spec(read_text_file(path), require_dag);
}

std::string format_sem_spec(const SemSpec& spec) {
    spec.check_shape();
    std::ostringstream out;
    out << "p = " << spec.p() << "\n";
    if (!spec.names.empty()) {
        out << "names = ";
        for (std::size_t i = 0; i < spec.names.size(); ++i) {
            out << (i ? ", " : "") << spec.names[i];
        }
        out << "\n";
    }
    out << "\n[edges]\n";
    for (Eigen::Index k = 0; k < spec.theta.cols(); ++k) {
        for (Eigen::Index j = 0; j < spec.theta.rows(); ++j) {
            if (spec.theta(j, k) != 0.0) {
                out << k + 1 << " -> " << j + 1 << " : " << format_double(spec.theta(j, k)) << "\n";
            }
        }
    }
    out << "\n[noise]\n";
    for (std::size_t j = 0; j < spec.p(); ++j) {
        out << "node " << j + 1 << ": " << noise_family_name(spec.noise[j]) << ", "
            << format_double(spec.noise[j].sigma) << "\n";
    }
    return out.str();
}

}  // namespace ancreg
