#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "observer/feedback/feedback.hpp"

namespace observer::service {

/// Learner position (blocks) and facing (degrees).
struct Coords {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double yaw = 0.0;    // [-180, 180)
    double pitch = 0.0;  // [-90, 90]

    bool operator==(const Coords&) const = default;
};

/// What a client submits: everything but the server-assigned fields.
struct ObservationInput {
    std::string student;
    std::string caption;
    Coords coords;
    std::vector<std::uint8_t> image;  // encoded PNG or JPEG
};

struct Observation {
    std::string id;
    std::string session_id;
    std::string student;
    std::string timestamp;  // ISO-8601 UTC, server-assigned
    Coords coords;
    std::string caption;
    std::string image_ref;  // relative to the session directory

    bool operator==(const Observation&) const = default;
};

struct AssessmentResult {
    std::string observation_id;
    std::string generated_caption;
    double score = 0.0;
    std::vector<std::string> keywords;
    feedback::Verdict verdict = feedback::Verdict::Retry;
    std::string feedback_text;
    std::string encoder_identity;
    std::int64_t latency_ms = 0;

    bool operator==(const AssessmentResult&) const = default;
};

struct SessionEntry {
    Observation observation;
    AssessmentResult result;

    bool operator==(const SessionEntry&) const = default;
};

/// An observation that was accepted for processing but could not be
/// assessed. It carries an error status instead of a result.
struct RejectedObservation {
    Observation observation;
    std::string error;

    bool operator==(const RejectedObservation&) const = default;
};

struct SessionRecord {
    std::string session_id;
    std::string created_at;
    std::vector<SessionEntry> entries;  // timestamp order
};

/// Throws ValidationError when student or caption is blank (or the caption
/// has no word tokens), or when yaw/pitch are out of range.
void validate_submission(const ObservationInput& input);

/// Current UTC time as "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string utc_timestamp();

}  // namespace observer::service
