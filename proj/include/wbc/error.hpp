#pragma once

#include <stdexcept>
#include <string>

namespace wbc {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operation received an image in the wrong colorspace.
struct ColorspaceError : Error {
    using Error::Error;
};

/// Images passed together do not share dimensions.
struct DimensionError : Error {
    using Error::Error;
};

/// Out-of-range or malformed parameter.
struct ParameterError : Error {
    using Error::Error;
};

/// The segmentation chain produced no usable object.
struct SegmentationFailure : Error {
    using Error::Error;
};

/// An image file could not be read or decoded.
struct DecodeError : Error {
    using Error::Error;
};

/// A persisted file does not match the expected layout.
struct SchemaError : Error {
    using Error::Error;
};

}  // namespace wbc
