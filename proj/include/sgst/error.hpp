#pragma once

#include <stdexcept>
#include <string>

namespace sgst {

// Exit-code mapping used by the CLI:
//   UsageError -> 1, DataError -> 2, NumericError -> 3.

// Bad flags, unknown commands, malformed configs.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data (manifests, tensor files, checkpoints).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite losses, shape mismatches, invalid numeric parameters.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sgst
