#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pmt {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// A structure does not fit inside its simulation cube.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// No extremum found on the axial profile of a template series.
class TruncationError : public Error {
public:
    using Error::Error;
};

/// The search ran out of admissible shifts before finding every requested atom.
class ExhaustionError : public Error {
public:
    ExhaustionError(const std::string& species, std::size_t found, std::size_t requested)
        : Error("search exhausted for species " + species + ": found " + std::to_string(found) +
                " of " + std::to_string(requested) + " requested atoms"),
          species_(species) {}
    const std::string& species() const noexcept { return species_; }

private:
    std::string species_;
};

}  // namespace pmt
