#pragma once

#include <stdexcept>
#include <string>

namespace tactictraj {

// Error taxonomy shared by the library and the CLI exit-code mapping:
// usage/argument/config errors -> exit 2, data/vocabulary errors -> exit 3,
// numeric aborts -> exit 4.

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct CapacityError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct VocabularyError : DataError {
    using DataError::DataError;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tactictraj
