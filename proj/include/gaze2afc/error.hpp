#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace gaze2afc {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string located(const std::string& path, std::size_t line, const std::string& what) {
    std::ostringstream os;
    os << path << ":" << line << ": " << what;
    return os.str();
}

} // namespace detail

// --- input parsing ---

/// A CSV row that cannot be parsed or violates a column constraint.
struct MalformedRow final : Error {
    MalformedRow(const std::string& path, std::size_t line, const std::string& what)
        : Error(detail::located(path, line, what)), line_number(line) {}
    std::size_t line_number;
};

/// Gaze timestamps must be strictly increasing.
struct NonMonotonicTimestamp final : Error {
    using Error::Error;
};

/// Keypoint label outside the configured label set.
struct UnknownLabel final : Error {
    using Error::Error;
};

/// The same label appears twice within one video frame.
struct DuplicateLabelInFrame final : Error {
    using Error::Error;
};

/// Gaze and keypoint streams share no time span.
struct NoTemporalOverlap final : Error {
    using Error::Error;
};

// --- kinematics / segmentation ---

/// A calibration block contains no usable inter-stimulus samples.
struct NoIsiData final : Error {
    using Error::Error;
};

/// Fewer than two samples, so no speed can be formed.
struct TooFewSamples final : Error {
    using Error::Error;
};

/// A trial window contains no aligned gaze at all.
struct EmptyTrialWindow final : Error {
    using Error::Error;
};

/// A trial produced no gaze segments; the trial is excluded upstream.
struct NoSegments final : Error {
    using Error::Error;
};

// --- features / modelling ---

/// A feature column is constant and cannot be standardized.
struct ZeroVariance final : Error {
    using Error::Error;
};

/// A model input contains NaN or infinity.
struct NonFiniteInput final : Error {
    using Error::Error;
};

/// Too many divergent transitions after warmup.
struct DivergenceRateTooHigh final : Error {
    using Error::Error;
};

/// Chains fail the split-Rhat / effective-sample-size gate.
struct NotConverged final : Error {
    using Error::Error;
};

/// A probability argument lies outside [0, 1].
struct OutOfRange final : Error {
    using Error::Error;
};

// --- evidence ---

/// Bridge iteration did not reach the fixed-point tolerance.
struct BridgeNotConverged final : Error {
    using Error::Error;
};

/// Proposal and posterior barely overlap; the estimate would be garbage.
struct ProposalMismatch final : Error {
    using Error::Error;
};

// --- configuration ---

/// A config value is missing, unparseable, or out of its legal range.
struct InvalidConfig final : Error {
    using Error::Error;
};

} // namespace gaze2afc
