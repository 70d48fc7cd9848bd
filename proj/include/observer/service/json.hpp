#pragma once

#include <nlohmann/json.hpp>

#include "observer/service/types.hpp"

namespace observer::service {

void to_json(nlohmann::json& j, const Coords& c);
void from_json(const nlohmann::json& j, Coords& c);
void to_json(nlohmann::json& j, const Observation& o);
void from_json(const nlohmann::json& j, Observation& o);
void to_json(nlohmann::json& j, const AssessmentResult& r);
void from_json(const nlohmann::json& j, AssessmentResult& r);
void to_json(nlohmann::json& j, const SessionEntry& e);
void from_json(const nlohmann::json& j, SessionEntry& e);
void to_json(nlohmann::json& j, const RejectedObservation& r);
void from_json(const nlohmann::json& j, RejectedObservation& r);

/// Body of a successful submission and of every stream event: the
/// AssessmentResult fields plus the stored observation under "observation".
nlohmann::json result_payload(const SessionEntry& entry);

/// Reads student, caption and x/y/z/yaw/pitch from a flat JSON object.
/// Missing coordinates default to zero. Throws ValidationError on wrong
/// types or missing student/caption.
ObservationInput parse_submission_meta(const nlohmann::json& meta);

}  // namespace observer::service
