#pragma once

#include <stdexcept>

namespace mailocr {

// One exception type per error family so callers can catch precisely.

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AlphabetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StorageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Batch normalization cannot estimate statistics from a single element.
struct DegenerateBatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mailocr
