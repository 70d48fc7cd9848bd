#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "observer/captioner/train.hpp"
#include "observer/corpus/synth.hpp"

namespace observer::testing {

/// Collects `event: result` payloads from a session stream on a background
/// thread until `expected` events arrived or stop() is called.
class StreamReader {
public:
    StreamReader(int port, const std::string& session_id, std::size_t expected)
        : expected_(expected)
    {
        thread_ = std::thread([this, port, session_id] {
            httplib::Client client("127.0.0.1", port);
            client.set_read_timeout(120);
            client.Get("/api/sessions/" + session_id + "/stream",
                       [this](const char* data, std::size_t len) {
                           std::lock_guard lock(mutex_);
                           buffer_.append(data, len);
                           connected_ = true;
                           std::size_t pos;
                           while ((pos = buffer_.find("\n\n")) != std::string::npos) {
                               const auto block = buffer_.substr(0, pos);
                               buffer_.erase(0, pos + 2);
                               const auto data_at = block.find("data: ");
                               if (block.find("event: result") != std::string::npos &&
                                   data_at != std::string::npos) {
                                   events_.push_back(nlohmann::json::parse(block.substr(data_at + 6)));
                               }
                           }
                           return events_.size() < expected_ && !stop_;
                       });
            done_ = true;
        });
    }

    ~StreamReader()
    {
        stop_ = true;
        if (thread_.joinable()) thread_.join();
    }

    bool wait_connected(std::chrono::milliseconds timeout = std::chrono::seconds(10))
    {
        const auto until = std::chrono::steady_clock::now() + timeout;
        while (std::chrono::steady_clock::now() < until) {
            {
                std::lock_guard lock(mutex_);
                if (connected_) return true;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        return false;
    }

    /// Waits for the expected count (or the stream to end).
    std::vector<nlohmann::json> wait(std::chrono::milliseconds timeout = std::chrono::seconds(60))
    {
        const auto until = std::chrono::steady_clock::now() + timeout;
        while (!done_ && std::chrono::steady_clock::now() < until) {
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        std::lock_guard lock(mutex_);
        return events_;
    }

private:
    std::size_t expected_;
    std::thread thread_;
    std::mutex mutex_;
    std::string buffer_;
    std::vector<nlohmann::json> events_;
    bool connected_ = false;
    std::atomic<bool> stop_{false};
    std::atomic<bool> done_{false};
};

struct EventSpec {
    std::string student;
    std::string caption;
    std::string image_file;
};

/// Writes a line-delimited JSON events file with plausible coordinates.
inline void write_events(const std::filesystem::path& file, const std::vector<EventSpec>& events,
                         long delay_ms = 0)
{
    std::ofstream out(file);
    int i = 0;
    for (const auto& e : events) {
        nlohmann::json j = {{"student", e.student}, {"caption", e.caption}, {"image_file", e.image_file},
                            {"x", 10.5 * i}, {"y", 64.0}, {"z", -3.25 * i}, {"yaw", -180.0 + 30.0 * i},
                            {"pitch", -45.0 + 9.0 * i}};
        if (delay_ms > 0) j["delay_ms"] = delay_ms;
        out << j.dump() << '\n';
        ++i;
    }
}

}  // namespace observer::testing
