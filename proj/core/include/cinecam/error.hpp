#pragma once

#include <stdexcept>
#include <string>

namespace cinecam {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// trajectory / geometry
struct LengthMismatch : Error { using Error::Error; };
struct FrameMismatch : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct DegenerateLookAt : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

// synthesis / captioning
struct InfeasibleTags : Error { using Error::Error; };
struct AmbiguousPrompt : Error { using Error::Error; };

// framing / classification
struct UnclassifiableFraming : Error { using Error::Error; };
struct MotionAmbiguous : Error { using Error::Error; };

// scoring
struct EmptyTags : Error { using Error::Error; };
struct RemoteTimeout : Error { using Error::Error; };
struct BadResponse : Error { using Error::Error; };
struct Unreachable : Error { using Error::Error; };

// tokenizer / model
struct BadTokenRole : Error { using Error::Error; };
struct LengthError : Error { using Error::Error; };
struct DataTooSmall : Error { using Error::Error; };

// metrics
struct TooFewSamples : Error { using Error::Error; };

// pipeline
struct IoError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct MissingArtifact : Error { using Error::Error; };
struct NoPairs : Error { using Error::Error; };

}  // namespace cinecam
