#include "observer/service/events.hpp"

#include <algorithm>

namespace observer::service {

std::optional<std::string> Subscription::next(std::chrono::milliseconds timeout)
{
    std::unique_lock lock(mutex_);
    ready_.wait_for(lock, timeout, [&] { return closed_ || !queue_.empty(); });
    if (queue_.empty()) return std::nullopt;
    auto payload = std::move(queue_.front());
    queue_.pop_front();
    return payload;
}

bool Subscription::closed() const
{
    std::lock_guard lock(mutex_);
    return closed_ && queue_.empty();
}

void Subscription::push(std::string payload)
{
    {
        std::lock_guard lock(mutex_);
        if (closed_) return;
        queue_.push_back(std::move(payload));
    }
    ready_.notify_all();
}

void Subscription::close()
{
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    ready_.notify_all();
}

std::shared_ptr<Subscription> EventBroadcaster::subscribe(const std::string& session_id)
{
    auto sub = std::make_shared<Subscription>(session_id);
    std::lock_guard lock(mutex_);
    if (closed_) {
        sub->close();
    } else {
        subs_.push_back(sub);
    }
    return sub;
}

void EventBroadcaster::unsubscribe(const std::shared_ptr<Subscription>& sub)
{
    sub->close();
    std::lock_guard lock(mutex_);
    std::erase(subs_, sub);
}

void EventBroadcaster::publish(const std::string& session_id, const std::string& payload)
{
    std::lock_guard lock(mutex_);
    for (const auto& sub : subs_) {
        if (sub->session_id() == session_id) sub->push(payload);
    }
}

void EventBroadcaster::close_all()
{
    std::lock_guard lock(mutex_);
    closed_ = true;
    for (const auto& sub : subs_) sub->close();
    subs_.clear();
}

std::size_t EventBroadcaster::subscriber_count() const
{
    std::lock_guard lock(mutex_);
    return subs_.size();
}

}  // namespace observer::service
