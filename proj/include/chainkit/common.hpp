#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace chainkit {

using Index = std::size_t;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Hop count used when no chain exists.
inline constexpr std::size_t kNoChain = std::numeric_limits<std::size_t>::max();

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad files, bad descriptors, metric axiom violations.
struct InputError : Error {
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

/// Query outside the represented range of tabulated data.
struct RangeError : Error {
  using Error::Error;
};

/// A hypothesis required by the underlying lemma does not hold.
struct HypothesisError : Error {
  using Error::Error;
};

/// A numerical fit could not be carried out with the supplied data.
struct FitError : Error {
  using Error::Error;
};

/// An internal consistency check failed; indicates a bug upstream.
struct ConsistencyError : Error {
  using Error::Error;
};

}  // namespace chainkit
