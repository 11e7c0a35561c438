#ifndef ARGCALC_ERRORS_HPP
#define ARGCALC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace argcalc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Lexical/syntactic problem in a formula, database or network file.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line, int column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// A variable was used in the wrong language (domain vs assumption).
class SortError : public Error {
public:
    using Error::Error;
};

// Evaluation hit a variable the assignment does not cover.
class EvalError : public Error {
public:
    using Error::Error;
};

// An enumeration-based routine was asked to exceed its size guard.
class SizeGuardError : public Error {
public:
    using Error::Error;
};

// Propagation rejects networks whose skeleton contains an undirected cycle.
class NotSinglyConnectedError : public Error {
public:
    using Error::Error;
};

// Propagation requires observations on single-parent leaf nodes.
class EvidenceNotAtLeavesError : public Error {
public:
    using Error::Error;
};

} // namespace argcalc

#endif
