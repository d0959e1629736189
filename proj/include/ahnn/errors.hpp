#ifndef AHNN_ERRORS_HPP
#define AHNN_ERRORS_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace ahnn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A trajectory left the admissible region.
class Divergence : public Error {
public:
    Divergence(std::size_t step, const std::string& what)
        : Error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    using Error::Error;
};

class SizeError : public Error {
public:
    using Error::Error;
};

class KeyError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class InsufficientBits : public Error {
public:
    using Error::Error;
};

/// The counter embedded in an envelope does not match the receiver's counter.
/// `recovered()` carries the sender's counter when it could be identified.
class DesyncError : public Error {
public:
    DesyncError(std::optional<unsigned> recovered, const std::string& what)
        : Error(what), recovered_(recovered) {}
    std::optional<unsigned> recovered() const noexcept { return recovered_; }

private:
    std::optional<unsigned> recovered_;
};

} // namespace ahnn

#endif // AHNN_ERRORS_HPP
