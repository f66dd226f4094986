#include "ancreg/errors.hpp"

#include <sstream>

namespace ancreg {

namespace {

std::string format_cycle(const std::vector<std::size_t>& cycle) {
    std::ostringstream out;
    out << "graph is cyclic: ";
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        if (i > 0) {
            out << " -> ";
        }
        out << cycle[i] + 1;
    }
    return out.str();
}

std::string with_location(const std::string& what, std::size_t row, std::size_t column) {
    if (row == 0) {
        return what;
    }
    std::ostringstream out;
    out << what << " (row " << row;
    if (column != 0) {
        out << ", column " << column;
    }
    out << ")";
    return out.str();
}

}  // namespace

CycleError::CycleError(std::vector<std::size_t> cycle)
    : Error(ErrorKind::Validation, format_cycle(cycle)), cycle_(std::move(cycle)) {}

ParseError::ParseError(const std::string& what, std::size_t row, std::size_t column)
    : Error(ErrorKind::Parse, with_location(what, row, column)), row_(row), column_(column) {}

}  // namespace ancreg
