#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ecnstar {

/// No epsilon on the sweep grid yields a full set of real solutions in [0,1].
/// Usually means the sample is too small or the path was not stationary.
class NoFullSolutionBand : public std::runtime_error {
public:
    explicit NoFullSolutionBand(int degree)
        : std::runtime_error("no epsilon in the sweep grid yields " + std::to_string(degree) +
                             " real solutions in [0,1]"),
          degree_(degree) {}
    int degree() const { return degree_; }

private:
    int degree_;
};

/// Every observed packet had a zero mark count; there is nothing to estimate.
class NoCongestionObserved : public std::runtime_error {
public:
    NoCongestionObserved() : std::runtime_error("all observed mark counts are zero") {}
};

/// A scenario file failed validation (bad reference, bad parameter, unknown key).
class ScenarioError : public std::runtime_error {
public:
    explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

/// A file could not be read or written; the message names the path.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// A text input (CSV, JSON) could not be parsed; carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

} // namespace ecnstar
