#pragma once

#include <stdexcept>
#include <string>

namespace ttlab {

// Base class for everything this library throws.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Grid construction / field/grid compatibility.
struct BadDimension : Error { using Error::Error; };
struct BadResolution : Error { using Error::Error; };
struct BadLength : Error { using Error::Error; };
struct BadAxis : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };
struct NonFiniteField : Error { using Error::Error; };

// Multiplier preconditions.
struct NegativeOrderOnNonzeroMean : Error { using Error::Error; };

// Model form/parameter misuse.
struct FormMismatch : Error { using Error::Error; };

// Time stepping.
struct SolveSingular : Error { using Error::Error; };
struct BlowUp : Error { using Error::Error; };

// Experiment driver.
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct ChecksumMismatch : Error { using Error::Error; };
struct WindowTooShort : Error { using Error::Error; };
struct NotANumberInSeries : Error { using Error::Error; };

} // namespace ttlab
