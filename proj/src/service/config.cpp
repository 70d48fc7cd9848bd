#include "observer/service/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "observer/error.hpp"

namespace observer::service {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view value)
{
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ValidationError(fmt::format("config: {} expects a number, got '{}'", key, value));
    }
    return out;
}

int parse_int(std::string_view key, std::string_view value)
{
    int out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ValidationError(fmt::format("config: {} expects an integer, got '{}'", key, value));
    }
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, std::string_view value)
{
    std::filesystem::path p{std::string(value)};
    if (p.is_relative() && !base.empty()) p = base / p;
    return p;
}

}  // namespace

void ServiceConfig::validate() const
{
    assessment.validate();
    if (queue_width < 1 || queue_width > 64) {
        throw ValidationError("config: queue_width must be in [1, 64]");
    }
    if (model_path.empty()) throw ValidationError("config: model_path is required");
    parse_listen_address(listen_address);
}

ServiceConfig parse_service_config(std::string_view text, const std::filesystem::path& base_dir)
{
    ServiceConfig cfg;
    cfg.data_dir = resolve(base_dir, "data");
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const auto line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ValidationError(fmt::format("config line {}: expected key = value", line_no));
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key == "model_path") {
            cfg.model_path = resolve(base_dir, value);
        } else if (key == "encoder_path") {
            cfg.encoder_path = value.empty() || value == "stub"
                                   ? std::string("stub")
                                   : resolve(base_dir, value).string();
        } else if (key == "gamma_threshold") {
            cfg.assessment.gamma_threshold = parse_double(key, value);
        } else if (key == "lambda_keywords") {
            cfg.assessment.lambda_keywords = parse_int(key, value);
        } else if (key == "beam_width") {
            cfg.assessment.beam_width = parse_int(key, value);
        } else if (key == "queue_width") {
            cfg.queue_width = parse_int(key, value);
        } else if (key == "listen_address") {
            cfg.listen_address = std::string(value);
        } else if (key == "data_dir") {
            cfg.data_dir = resolve(base_dir, value);
        } else if (key == "static_dir") {
            if (!value.empty()) cfg.static_dir = resolve(base_dir, value);
        } else {
            throw ValidationError(fmt::format("config line {}: unknown key '{}'", line_no, key));
        }
    }
    cfg.validate();
    return cfg;
}

ServiceConfig load_service_config(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) throw NotFoundError("config file not found: " + file.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_service_config(text.str(), file.parent_path());
}

HostPort parse_listen_address(std::string_view address)
{
    const auto colon = address.rfind(':');
    if (colon == std::string_view::npos || colon == 0) {
        throw ValidationError(fmt::format("listen_address '{}' is not host:port", address));
    }
    HostPort hp{std::string(address.substr(0, colon)), 0};
    const auto port = address.substr(colon + 1);
    const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), hp.port);
    if (ec != std::errc{} || ptr != port.data() + port.size() || hp.port < 0 || hp.port > 65535) {
        throw ValidationError(fmt::format("listen_address '{}' has a bad port", address));
    }
    return hp;
}

}  // namespace observer::service
