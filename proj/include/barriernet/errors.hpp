#pragma once

#include <stdexcept>
#include <string>

namespace barriernet {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input text (bad CSV row, bad date string). Message carries the line number.
struct ParseError : Error {
    using Error::Error;
};

// A domain invariant was violated (bar prices inconsistent, bad precondition).
struct ValidationError : Error {
    using Error::Error;
};

// Not enough bars to satisfy a window or horizon requirement.
struct InsufficientDataError : Error {
    using Error::Error;
};

// Tensor / batch dimensions do not match what a layer expects.
struct ShapeError : Error {
    using Error::Error;
};

// File level problems: unreadable file, bad magic, checksum mismatch.
struct IoError : Error {
    using Error::Error;
};

// Bad or inconsistent configuration value. Message names the field.
struct ConfigError : Error {
    using Error::Error;
};

// A pipeline step was invoked before the step that produces its input.
// Message names the subcommand to run first.
struct PrerequisiteError : Error {
    using Error::Error;
};

}  // namespace barriernet
