#pragma once

#include <stdexcept>
#include <string>

namespace qnet {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidNetwork : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct InvalidPair : Error { using Error::Error; };
struct CapacityError : Error { using Error::Error; };
struct NumericalInstability : Error { using Error::Error; };
struct StepTooLarge : Error { using Error::Error; };
struct BasisError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace qnet
