#pragma once

#include <stdexcept>
#include <string>

namespace styloscope {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input supplied by the caller: missing files, malformed records,
/// infeasible settings. The CLI maps these to exit status 1.
class InputError : public Error {
public:
    using Error::Error;
};

/// A numeric precondition failed (singular matrix, degenerate ranks, ...).
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace styloscope
