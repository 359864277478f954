#pragma once

#include <stdexcept>
#include <string>

namespace giw {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input graph (or a component of it) is not connected.
struct NotConnectedError : Error {
    using Error::Error;
};

// Morphism failed the covering-map conditions.
struct NotACoverError : Error {
    using Error::Error;
};

// Exhaustive enumeration refused: edge count above the cap.
struct TooLargeError : Error {
    using Error::Error;
};

// Flattened matrix dimension above the cap.
struct CapExceededError : Error {
    using Error::Error;
};

// p-part requested for a group with free rank and no opt-in.
struct InfiniteGroupError : Error {
    using Error::Error;
};

// Invariant fit needs at least levels 0..3.
struct InsufficientLevelsError : Error {
    using Error::Error;
};

// The graph is disconnected, or the voltages disconnect the covers.
struct DisconnectedError : Error {
    using Error::Error;
};

// Malformed input file.
struct ParseError : Error {
    using Error::Error;
};

// An internal cross-check failed; indicates a bug, not bad input.
struct InternalCheckError : Error {
    using Error::Error;
};

} // namespace giw
