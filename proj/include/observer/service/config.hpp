#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "observer/feedback/feedback.hpp"

namespace observer::service {

/// Service configuration. The file format is one `key = value` pair per
/// line; blank lines and lines starting with '#' are ignored. Relative
/// paths are resolved against the directory holding the file.
///
///   model_path       trained captioner file (required)
///   encoder_path     "stub" or an embedding table file (default stub)
///   gamma_threshold  pass threshold (default 0.5)
///   lambda_keywords  keywords per feedback message (default 2)
///   beam_width       beam search width (default 3)
///   queue_width      concurrent assessments (default 1)
///   listen_address   host:port (default 127.0.0.1:8080)
///   data_dir         session store root (default ./data)
///   static_dir       optional directory served at "/"
struct ServiceConfig {
    std::filesystem::path model_path;
    std::string encoder_path = "stub";
    feedback::AssessmentConfig assessment;
    int queue_width = 1;
    std::string listen_address = "127.0.0.1:8080";
    std::filesystem::path data_dir = "data";
    std::optional<std::filesystem::path> static_dir;

    /// Throws ValidationError on out-of-range values.
    void validate() const;
};

/// Throws ValidationError on unknown keys, malformed lines or bad values.
ServiceConfig parse_service_config(std::string_view text,
                                   const std::filesystem::path& base_dir = {});
ServiceConfig load_service_config(const std::filesystem::path& file);

struct HostPort {
    std::string host;
    int port = 0;
};

/// "host:port" -> {host, port}; throws ValidationError otherwise.
HostPort parse_listen_address(std::string_view address);

}  // namespace observer::service
