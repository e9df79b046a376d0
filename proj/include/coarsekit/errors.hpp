#pragma once

#include <stdexcept>
#include <string>

namespace coarsekit {

/// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (bad shapes, wrong value
/// domain, failed prerequisite check).
struct PreconditionError : Error {
  using Error::Error;
};

/// Malformed JSON / CSV / CLI input.
struct ParseError : Error {
  using Error::Error;
};

/// A configured cap would be exceeded (element counts, dense
/// materialization sizes).
struct ResourceError : Error {
  using Error::Error;
};

/// The requested evaluation would leave the enumerated ball: the
/// operation needs entries inside the boundary shell that the margin
/// policy declares unreliable.
struct TruncationError : Error {
  using Error::Error;
};

}  // namespace coarsekit
