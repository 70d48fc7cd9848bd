#include "observer/service/types.hpp"

#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "observer/corpus/text.hpp"
#include "observer/error.hpp"

namespace observer::service {

namespace {

bool blank(const std::string& s)
{
    return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

void validate_submission(const ObservationInput& input)
{
    if (blank(input.student)) throw ValidationError("student must not be empty");
    if (blank(input.caption)) throw ValidationError("caption must not be empty");
    if (corpus::normalize_tokens(input.caption).empty()) {
        throw ValidationError("caption has no words");
    }
    const auto& c = input.coords;
    for (double v : {c.x, c.y, c.z, c.yaw, c.pitch}) {
        if (!std::isfinite(v)) throw ValidationError("coordinates must be finite");
    }
    if (c.pitch < -90.0 || c.pitch > 90.0) {
        throw ValidationError(fmt::format("pitch {} outside [-90, 90]", c.pitch));
    }
    if (c.yaw < -180.0 || c.yaw >= 180.0) {
        throw ValidationError(fmt::format("yaw {} outside [-180, 180)", c.yaw));
    }
    if (input.image.empty()) throw ValidationError("image is missing");
}

std::string utc_timestamp()
{
    using namespace std::chrono;
    const auto now = system_clock::now();
    const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    const std::time_t t = system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z", tm.tm_year + 1900,
                       tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
}

}  // namespace observer::service
