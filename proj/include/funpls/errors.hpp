#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace funpls {

/// Malformed input: bad files, bad specs, violated type invariants.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two objects that must share a grid do not.
class GridMismatchError : public std::invalid_argument {
public:
    GridMismatchError() : std::invalid_argument("grid mismatch") {}
    explicit GridMismatchError(const std::string& what) : std::invalid_argument(what) {}
};

/// Base for failures of the numerical algorithms themselves.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A direction/column became linearly dependent on its predecessors.
/// `index` is 1-based, matching component numbering.
class RankError : public NumericalError {
public:
    RankError(std::size_t index, const std::string& detail)
        : NumericalError("rank deficiency at component " + std::to_string(index) + ": " + detail),
          index_(index) {}

    [[nodiscard]] std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// A quadratic form that should be nonnegative is substantially negative.
class NotPsdError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A requested order exceeds what the model can represent.
class SingularityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace funpls
