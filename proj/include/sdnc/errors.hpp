#pragma once

#include <stdexcept>
#include <string>

namespace sdnc {

// One exception type per contract failure mode. Tests match on the concrete
// type, so these are never collapsed into a generic error.

struct ShapeError : std::invalid_argument {
    explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct EmptyInput : std::invalid_argument {
    explicit EmptyInput(const std::string& msg) : std::invalid_argument(msg) {}
};

struct NonFiniteInput : std::invalid_argument {
    explicit NonFiniteInput(const std::string& msg) : std::invalid_argument(msg) {}
};

struct IndexError : std::out_of_range {
    explicit IndexError(const std::string& msg) : std::out_of_range(msg) {}
};

struct EmptyMemory : std::logic_error {
    explicit EmptyMemory(const std::string& msg) : std::logic_error(msg) {}
};

struct SealedMemory : std::logic_error {
    explicit SealedMemory(const std::string& msg) : std::logic_error(msg) {}
};

struct AlreadyLoaded : std::logic_error {
    explicit AlreadyLoaded(const std::string& msg) : std::logic_error(msg) {}
};

struct EncoderMemoryMissing : std::logic_error {
    explicit EncoderMemoryMissing(const std::string& msg) : std::logic_error(msg) {}
};

struct NonFreshEngine : std::logic_error {
    explicit NonFreshEngine(const std::string& msg) : std::logic_error(msg) {}
};

// Bad run configuration (dimensions, modes, flag combinations). The CLI maps
// this to its usage-error exit code.
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sdnc
