#pragma once

#include <stdexcept>
#include <string>

namespace antroute {

/// A protocol operation was called outside its precondition.
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DecodeError : public ProtocolError {
public:
    using ProtocolError::ProtocolError;
};

class ChannelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed scenario/topology documents or bad command-line input.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A simulator-checked protocol invariant did not hold.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace antroute
