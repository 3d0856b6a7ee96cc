#pragma once

#include <stdexcept>
#include <string>

namespace taskguard {

// Base for everything this library throws on purpose. Catching taskguard::Error
// at a boundary (CLI, bindings) is enough to map failures to exit codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Screen / scenario invariant violations (bad bbox, non-contiguous indices,
// dangling transition targets, ...). Message names the offending piece.
class ValidationError : public Error {
public:
    using Error::Error;
};

enum class CodecErrorKind {
    syntax,            // token stream malformed (missing close, trailing junk, bad int)
    unknown_tag,       // top-level tag not one of the three known kinds
    mismatched_tags,   // close tag does not match open tag
    payload_domain,    // bit payload not 0/1
    missing_subtag,    // locate block lacks one of the four coordinate subtags
    duplicate_subtag,  // coordinate subtag repeated
    subtag_order,      // coordinate subtags out of canonical order
    degenerate_bbox,   // x_min >= x_max or y_min >= y_max
};

const char* to_string(CodecErrorKind kind);

class CodecError : public Error {
public:
    CodecError(CodecErrorKind kind, const std::string& msg)
        : Error(std::string(to_string(kind)) + ": " + msg), kind(kind) {}
    CodecErrorKind kind;
};

// Command text does not match any accepted template.
class CommandParseError : public Error {
public:
    using Error::Error;
};

enum class GroundingErrorKind {
    caption_not_found,
    ambiguous_caption,
    no_element_right_of,
    target_not_input,
};

class GroundingError : public Error {
public:
    GroundingError(GroundingErrorKind kind, const std::string& msg)
        : Error(msg), kind(kind) {}
    GroundingErrorKind kind;
};

// Simulator refused an action (nonexistent/invisible target element, ...).
class ExecutionError : public Error {
public:
    using Error::Error;
};

// Scenario authoring problems: unreadable file, schema violations, missing
// scripted-plan entries during a run.
class ScenarioError : public Error {
public:
    using Error::Error;
};

// A guard backend could not produce a verdict (transport exhausted, adapter
// unreachable). The orchestrator applies its failure policy to these.
class GuardUnavailableError : public Error {
public:
    using Error::Error;
};

class PlannerUnavailableError : public Error {
public:
    using Error::Error;
};

// Outbound payload still contained a stored secret. Always fatal.
class PrivacyViolationError : public Error {
public:
    using Error::Error;
};

// Two different secret values mapped to the same placeholder name.
class PlaceholderCollisionError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class CorpusError : public Error {
public:
    using Error::Error;
};

}  // namespace taskguard
