#include "observer/service/replay.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "observer/error.hpp"

namespace observer::service {

using nlohmann::json;

namespace {

std::string describe(httplib::Error err)
{
    return httplib::to_string(err);
}

struct Event {
    json meta;
    std::string image;
    std::string image_name;
    long delay_ms = 0;
};

Event parse_event(const std::string& line, const std::filesystem::path& base)
{
    Event ev;
    const auto j = json::parse(line);
    if (!j.is_object()) throw ValidationError("event is not a JSON object");
    for (const char* key : {"student", "caption", "image_file"}) {
        if (!j.contains(key) || !j[key].is_string()) {
            throw ValidationError(std::string("event lacks string field ") + key);
        }
    }
    ev.meta = json{{"student", j["student"]}, {"caption", j["caption"]}};
    for (const char* key : {"x", "y", "z", "yaw", "pitch"}) {
        if (!j.contains(key) || !j[key].is_number()) {
            throw ValidationError(std::string("event lacks numeric field ") + key);
        }
        ev.meta[key] = j[key];
    }
    ev.delay_ms = j.value("delay_ms", 0L);
    const auto path = base / j["image_file"].get<std::string>();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("event image not found: " + path.string());
    std::ostringstream data;
    data << in.rdbuf();
    ev.image = data.str();
    ev.image_name = path.filename().string();
    return ev;
}

}  // namespace

ReplaySummary replay_events(const std::filesystem::path& events_file, const ReplayOptions& options)
{
    std::ifstream in(events_file);
    if (!in) throw NotFoundError("events file not found: " + events_file.string());

    httplib::Client client(options.endpoint);
    client.set_connection_timeout(5);
    client.set_read_timeout(120);

    ReplaySummary summary;
    if (options.session_id) {
        summary.session_id = *options.session_id;
    } else {
        auto res = client.Post("/api/sessions");
        if (!res) throw TransportError("cannot reach " + options.endpoint + ": " + describe(res.error()));
        if (res->status != 201) {
            throw TransportError(fmt::format("session creation failed with HTTP {}", res->status));
        }
        summary.session_id = json::parse(res->body).at("session_id").get<std::string>();
    }

    const auto base = events_file.parent_path();
    const std::string path = "/api/sessions/" + summary.session_id + "/observations";
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++summary.submitted;
        Event ev;
        try {
            ev = parse_event(line, base);
        } catch (const std::exception& e) {
            spdlog::warn("replay: line {} skipped: {}", line_no, e.what());
            ++summary.errored;
            continue;
        }
        if (options.honor_delay && ev.delay_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(ev.delay_ms));
        }
        httplib::MultipartFormDataItems items = {
            {"meta", ev.meta.dump(), "meta.json", "application/json"},
            {"image", ev.image, ev.image_name, "application/octet-stream"},
        };
        auto res = client.Post(path, items);
        if (!res) {
            throw TransportError(fmt::format("line {}: cannot reach {}: {}", line_no,
                                             options.endpoint, describe(res.error())));
        }
        if (res->status != 201) {
            spdlog::warn("replay: line {} rejected with HTTP {}: {}", line_no, res->status, res->body);
            ++summary.errored;
            continue;
        }
        const auto verdict = json::parse(res->body).at("verdict").get<std::string>();
        if (verdict == "Pass") {
            ++summary.passed;
        } else {
            ++summary.retried;
        }
    }
    return summary;
}

}  // namespace observer::service
