#include "observer/service/json.hpp"

#include "observer/error.hpp"

namespace observer::service {

using nlohmann::json;

void to_json(json& j, const Coords& c)
{
    j = json{{"x", c.x}, {"y", c.y}, {"z", c.z}, {"yaw", c.yaw}, {"pitch", c.pitch}};
}

void from_json(const json& j, Coords& c)
{
    c.x = j.at("x").get<double>();
    c.y = j.at("y").get<double>();
    c.z = j.at("z").get<double>();
    c.yaw = j.at("yaw").get<double>();
    c.pitch = j.at("pitch").get<double>();
}

void to_json(json& j, const Observation& o)
{
    j = json{{"id", o.id},           {"session_id", o.session_id}, {"student", o.student},
             {"timestamp", o.timestamp}, {"coords", o.coords},     {"caption", o.caption},
             {"image_ref", o.image_ref}};
}

void from_json(const json& j, Observation& o)
{
    o.id = j.at("id").get<std::string>();
    o.session_id = j.at("session_id").get<std::string>();
    o.student = j.at("student").get<std::string>();
    o.timestamp = j.at("timestamp").get<std::string>();
    o.coords = j.at("coords").get<Coords>();
    o.caption = j.at("caption").get<std::string>();
    o.image_ref = j.at("image_ref").get<std::string>();
}

void to_json(json& j, const AssessmentResult& r)
{
    j = json{{"observation_id", r.observation_id},
             {"generated_caption", r.generated_caption},
             {"score", r.score},
             {"keywords", r.keywords},
             {"verdict", feedback::to_string(r.verdict)},
             {"feedback_text", r.feedback_text},
             {"encoder_identity", r.encoder_identity},
             {"latency_ms", r.latency_ms}};
}

void from_json(const json& j, AssessmentResult& r)
{
    r.observation_id = j.at("observation_id").get<std::string>();
    r.generated_caption = j.at("generated_caption").get<std::string>();
    r.score = j.at("score").get<double>();
    r.keywords = j.at("keywords").get<std::vector<std::string>>();
    const auto verdict = j.at("verdict").get<std::string>();
    if (verdict == feedback::to_string(feedback::Verdict::Pass)) {
        r.verdict = feedback::Verdict::Pass;
    } else if (verdict == feedback::to_string(feedback::Verdict::Retry)) {
        r.verdict = feedback::Verdict::Retry;
    } else {
        throw FormatError("unknown verdict: " + verdict);
    }
    r.feedback_text = j.at("feedback_text").get<std::string>();
    r.encoder_identity = j.at("encoder_identity").get<std::string>();
    r.latency_ms = j.at("latency_ms").get<std::int64_t>();
}

void to_json(json& j, const SessionEntry& e)
{
    j = json{{"observation", e.observation}, {"result", e.result}};
}

void from_json(const json& j, SessionEntry& e)
{
    e.observation = j.at("observation").get<Observation>();
    e.result = j.at("result").get<AssessmentResult>();
}

void to_json(json& j, const RejectedObservation& r)
{
    j = json{{"observation", r.observation}, {"status", "error"}, {"error", r.error}};
}

void from_json(const json& j, RejectedObservation& r)
{
    r.observation = j.at("observation").get<Observation>();
    r.error = j.at("error").get<std::string>();
}

json result_payload(const SessionEntry& entry)
{
    json j = entry.result;
    j["observation"] = entry.observation;
    return j;
}

ObservationInput parse_submission_meta(const json& meta)
{
    if (!meta.is_object()) throw ValidationError("observation metadata must be a JSON object");
    ObservationInput input;
    try {
        if (!meta.contains("student")) throw ValidationError("missing field: student");
        if (!meta.contains("caption")) throw ValidationError("missing field: caption");
        input.student = meta.at("student").get<std::string>();
        input.caption = meta.at("caption").get<std::string>();
        input.coords.x = meta.value("x", 0.0);
        input.coords.y = meta.value("y", 0.0);
        input.coords.z = meta.value("z", 0.0);
        input.coords.yaw = meta.value("yaw", 0.0);
        input.coords.pitch = meta.value("pitch", 0.0);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad observation metadata: ") + e.what());
    }
    return input;
}

}  // namespace observer::service
