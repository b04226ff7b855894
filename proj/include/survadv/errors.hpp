#pragma once

#include <stdexcept>
#include <string>

namespace survadv {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file (TSV / JSONL syntax or schema).
struct ParseError : Error {
    using Error::Error;
};

// Structurally invalid ontology (cycle, duplicate child, empty file).
struct StructureError : Error {
    using Error::Error;
};

// Code id not present where it is required (ontology leaf, vocabulary).
struct UnknownCode : Error {
    using Error::Error;
};

// An operation was called with its preconditions violated; signals a
// bookkeeping bug in the caller, not bad user input.
struct PreconditionViolation : Error {
    using Error::Error;
};

// Record cannot be embedded (every visit empty).
struct DegenerateRecord : Error {
    using Error::Error;
};

// Cohort unusable for training (all censored or all observed).
struct DegenerateCohort : Error {
    using Error::Error;
};

struct NonFiniteLoss : Error {
    using Error::Error;
};

struct UntrainedModel : Error {
    using Error::Error;
};

struct NoPermissiblePairs : Error {
    using Error::Error;
};

struct NoObservedPatients : Error {
    using Error::Error;
};

// Bad run configuration (CLI exit code 2).
struct ConfigError : Error {
    using Error::Error;
};

// Mismatched artifacts, e.g. model/cohort vocabulary drift (CLI exit code 3).
struct CompatibilityError : Error {
    using Error::Error;
};

// Malformed data artifact, e.g. a bad action-log line (CLI exit code 4).
struct DataError : Error {
    using Error::Error;
};

}  // namespace survadv
