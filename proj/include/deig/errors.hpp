#pragma once

#include <stdexcept>
#include <string>

namespace deig {

// Base class for every error raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// linalg
struct NonSquareError : Error { using Error::Error; };
struct NotSymmetricError : Error { using Error::Error; };
struct NoConvergenceError : Error { using Error::Error; };
struct RankDeficientError : Error { using Error::Error; };
struct NotPositiveDefiniteError : Error { using Error::Error; };

// datagen
struct NotPositiveSemidefiniteError : Error { using Error::Error; };
struct UnattainableSkewnessError : Error { using Error::Error; };
struct SizeMismatchError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// cluster
struct EmptyClusterError : Error { using Error::Error; };
struct TransportSetupFailedError : Error { using Error::Error; };
struct WorkerUnreachableError : Error { using Error::Error; };
struct NotUnitVectorError : Error { using Error::Error; };

// solver
struct ZeroIterateError : Error { using Error::Error; };
struct DeflationCollapseError : Error { using Error::Error; };

// metrics / apps
struct NotOrthonormalError : Error { using Error::Error; };
struct DimensionMismatchError : Error { using Error::Error; };
struct SingularNormalEquationsError : Error { using Error::Error; };

// cli
struct ParseError : Error { using Error::Error; };

}  // namespace deig
