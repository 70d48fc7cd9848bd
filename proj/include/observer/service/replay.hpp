#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace observer::service {

struct ReplaySummary {
    std::size_t submitted = 0;
    std::size_t passed = 0;
    std::size_t retried = 0;
    std::size_t errored = 0;
    std::string session_id;

    bool operator==(const ReplaySummary&) const = default;
};

struct ReplayOptions {
    /// Base URL such as "http://127.0.0.1:8080".
    std::string endpoint;
    /// Existing session to post into; a new one is created otherwise.
    std::optional<std::string> session_id;
    /// Sleep for each event's delay_ms before sending it.
    bool honor_delay = true;
};

/// Submits every non-blank line of a line-delimited JSON events file in
/// order. Each event has student, caption, image_file (relative to the
/// events file), x, y, z, yaw, pitch and an optional delay_ms. Malformed
/// lines and rejected submissions count as errored. Throws TransportError
/// when the endpoint cannot be reached.
ReplaySummary replay_events(const std::filesystem::path& events_file, const ReplayOptions& options);

}  // namespace observer::service
