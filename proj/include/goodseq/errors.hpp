#pragma once

#include <stdexcept>
#include <string>

namespace goodseq {

// Base class for all library errors. Subclasses map onto the CLI exit-code
// contract: ConfigError and the validation errors exit 2, the computation
// errors (precision, growth) exit 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Modulus family validation.
struct RatioTooSmallError : Error {
    using Error::Error;
};
struct NotIncreasingError : Error {
    using Error::Error;
};
struct NonPositiveError : Error {
    using Error::Error;
};

// An explicit (or length-limited custom) family ran out of moduli.
struct ModuliExhaustedError : Error {
    using Error::Error;
};

// A dyadic angle does not carry enough mantissa bits for the requested
// integer multiplier. The caller must rebuild the angle at higher precision.
struct InsufficientPrecisionError : Error {
    using Error::Error;
};

// No admissible subsequence index exists within the verification horizon.
struct GrowthTooSlowError : Error {
    using Error::Error;
};

// A report was requested deeper than the selected subsequence.
struct SelectionTooShallowError : Error {
    using Error::Error;
};

// Bad experiment configuration (CLI / JSON descriptors).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace goodseq
