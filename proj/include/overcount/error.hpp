#pragma once

#include <stdexcept>
#include <string>

namespace overcount {

/// Raised for malformed inputs and violated preconditions.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A query that has no data to answer from (e.g. a yearly average over zero scenes).
class NoDataError : public Error {
public:
    using Error::Error;
};

}  // namespace overcount
