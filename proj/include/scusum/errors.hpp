#pragma once

#include <stdexcept>
#include <string>

namespace scusum {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// bad arguments, dimension mismatches, non-finite inputs
struct InvalidInput : Error {
    using Error::Error;
};

// orthogonal complement requested for a full-rank basis (d == k)
struct EmptyComplement : Error {
    using Error::Error;
};

// eigenvalue gaps too small for the asymptotic formulas
struct DegenerateSpectrum : Error {
    using Error::Error;
};

// every Monte-Carlo replicate hit the run-length cap
struct ThresholdTooHigh : Error {
    using Error::Error;
};

// threshold search could not bracket or meet the tolerance
struct CalibrationFailed : Error {
    using Error::Error;
};

// post-change subspace lies inside the pre-change one
struct NoDetectableChange : Error {
    using Error::Error;
};

// malformed input file; carries the offending row when known
struct ParseError : Error {
    explicit ParseError(const std::string& msg, long row = -1)
        : Error(row >= 0 ? msg + " (row " + std::to_string(row) + ")" : msg), row_number(row) {}
    long row_number;
};

// iterative solver exceeded its sweep cap
struct ConvergenceError : Error {
    using Error::Error;
};

}  // namespace scusum
