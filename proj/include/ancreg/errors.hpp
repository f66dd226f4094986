#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ancreg {

/// Broad category of a failure; the CLI maps each onto a distinct exit code.
enum class ErrorKind {
    Usage,
    Parse,
    Validation,
    Numerical,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised when a weight matrix does not describe a DAG. `cycle()` lists the
/// 0-based nodes of the reported cycle, first node repeated at the end.
class CycleError : public Error {
public:
    explicit CycleError(std::vector<std::size_t> cycle);
    [[nodiscard]] const std::vector<std::size_t>& cycle() const noexcept { return cycle_; }

private:
    std::vector<std::size_t> cycle_;
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class RankDeficient : public Error {
public:
    explicit RankDeficient(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class DegenerateFit : public Error {
public:
    explicit DegenerateFit(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class EmptyAncestors : public Error {
public:
    explicit EmptyAncestors(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

class MomentError : public Error {
public:
    explicit MomentError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

/// Text input that could not be parsed. Row and column are 1-based; zero
/// means the location is unknown or does not apply.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row = 0, std::size_t column = 0);
    [[nodiscard]] std::size_t row() const noexcept { return row_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

class NonFiniteError : public ParseError {
public:
    NonFiniteError(const std::string& what, std::size_t row, std::size_t column)
        : ParseError(what, row, column) {}
};

}  // namespace ancreg
