#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace observer::service {

/// A per-connection queue of stream payloads.
class Subscription {
public:
    explicit Subscription(std::string session_id) : session_id_(std::move(session_id)) {}

    const std::string& session_id() const { return session_id_; }

    /// Next payload, or std::nullopt on timeout or once closed and drained.
    std::optional<std::string> next(std::chrono::milliseconds timeout);
    bool closed() const;

    void push(std::string payload);
    void close();

private:
    std::string session_id_;
    mutable std::mutex mutex_;
    std::condition_variable ready_;
    std::deque<std::string> queue_;
    bool closed_ = false;
};

/// Fans each published payload out to every subscription of its session,
/// exactly once per subscription.
class EventBroadcaster {
public:
    std::shared_ptr<Subscription> subscribe(const std::string& session_id);
    void unsubscribe(const std::shared_ptr<Subscription>& sub);
    void publish(const std::string& session_id, const std::string& payload);
    /// Closes every subscription; later subscriptions start closed.
    void close_all();
    std::size_t subscriber_count() const;

private:
    mutable std::mutex mutex_;
    std::vector<std::shared_ptr<Subscription>> subs_;
    bool closed_ = false;
};

}  // namespace observer::service
