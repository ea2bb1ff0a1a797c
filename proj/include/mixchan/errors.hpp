#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixchan {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument violated a precondition (out of domain, wrong size, invalid parameter).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Input data carries no usable information (all samples equal, all records zero).
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

/// An iterative solver ran out of iterations; carries the last iterate.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_iterate)
        : Error(what), last_iterate_(last_iterate) {}
    double last_iterate() const noexcept { return last_iterate_; }

private:
    double last_iterate_;
};

/// A mixture component lost its support (weight or variance below floor) during an M-step.
class CollapseError : public Error {
public:
    CollapseError(const std::string& what, std::size_t component)
        : Error(what), component_(component) {}
    std::size_t component() const noexcept { return component_; }

private:
    std::size_t component_;
};

/// Every component pdf underflowed to zero for some sample; responsibilities undefined.
class ResponsibilityError : public Error {
public:
    ResponsibilityError(const std::string& what, std::size_t sample_index)
        : Error(what), sample_index_(sample_index) {}
    std::size_t sample_index() const noexcept { return sample_index_; }

private:
    std::size_t sample_index_;
};

/// Every EM restart failed; carries one diagnostic line per restart.
class FitFailedError : public Error {
public:
    FitFailedError(const std::string& what, std::vector<std::string> diagnostics)
        : Error(what), diagnostics_(std::move(diagnostics)) {}
    const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

/// A malformed row in an input file; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Structurally readable input whose content is inconsistent (e.g. non-monotone frequencies).
class FormatError : public Error {
public:
    using Error::Error;
};

/// A band filter that matched no records.
class EmptyBandError : public Error {
public:
    using Error::Error;
};

/// A model or report file that failed schema or invariant validation on load.
class LoadError : public Error {
public:
    using Error::Error;
};

}  // namespace mixchan
