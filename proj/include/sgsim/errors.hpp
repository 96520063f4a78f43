#pragma once

#include <stdexcept>
#include <string>

namespace sgsim {

// Base class for all recoverable pipeline errors. CLI maps ConfigError and
// SchemaViolation to exit code 1, everything else to exit code 2.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scene generation could not place all objects within the retry budget.
struct PlacementFailure : Error {
    using Error::Error;
};

// The attack's feasible set is empty (even zero displacement violates a
// constraint).
struct Infeasible : Error {
    using Error::Error;
};

// An attack spec references a detection id that does not exist.
struct UnknownTarget : Error {
    using Error::Error;
};

// A document does not conform to its published schema.
struct SchemaViolation : Error {
    using Error::Error;
};

// Strict-mode import encountered a predicate string with no supported mapping.
struct UnknownPredicate : Error {
    using Error::Error;
};

// A camera-vocabulary alias was passed to the 3D rule evaluator.
struct UnsupportedPredicate : Error {
    using Error::Error;
};

// Scenario configuration failed validation; message carries the field path.
struct ConfigError : Error {
    using Error::Error;
};

// A consistency report does not cover the detections passed to fusion.
struct ReportMismatch : Error {
    using Error::Error;
};

// An aggregate operation received zero records.
struct EmptyInput : Error {
    using Error::Error;
};

// Filesystem write/read failed.
struct IoFailure : Error {
    using Error::Error;
};

}  // namespace sgsim
