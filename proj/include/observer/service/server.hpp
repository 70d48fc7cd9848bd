#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include "observer/service/assessor.hpp"
#include "observer/service/config.hpp"
#include "observer/service/events.hpp"
#include "observer/service/store.hpp"

namespace httplib {
class Server;
}

namespace observer::service {

/// Validate -> decode -> assess -> persist -> publish. Shared by the HTTP
/// layer and in-process callers.
class ObservationService {
public:
    ObservationService(Assessor& assessor, SessionStore& store, EventBroadcaster& events)
        : assessor_(assessor), store_(store), events_(events) {}

    /// Throws ValidationError (nothing stored), NotFoundError (unknown
    /// session), or ImageDecodeError / other errors after storing the
    /// observation with an error status.
    SessionEntry submit(const std::string& session_id, const ObservationInput& input);

private:
    Assessor& assessor_;
    SessionStore& store_;
    EventBroadcaster& events_;
};

/// HTTP front end:
///   POST /api/sessions                         -> 201 {session_id}
///   POST /api/sessions/{id}/observations       -> 201 result | 400 | 404 | 422
///   GET  /api/sessions/{id}/observations       -> [{observation, result}]
///   GET  /api/sessions/{id}/rejections         -> [{observation, error}]
///   GET  /api/sessions/{id}/export             -> application/zip
///   GET  /api/sessions/{id}/stream             -> text/event-stream
///   GET  /api/health                           -> {status, model_identity, encoder_identity}
class Server {
public:
    /// Loads the model and encoder named in the config.
    explicit Server(const ServiceConfig& cfg);
    Server(std::shared_ptr<const captioner::CaptionerModel> model,
           std::shared_ptr<const semantics::SentenceEncoder> encoder, const ServiceConfig& cfg);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds `host:port`; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves on the calling thread until stop().
    void run();
    /// bind + run on a background thread; returns the bound port.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    void stop();

    SessionStore& store() { return *store_; }
    EventBroadcaster& events() { return events_; }
    Assessor& assessor() { return *assessor_; }

private:
    void install_routes();

    ServiceConfig cfg_;
    std::unique_ptr<Assessor> assessor_;
    std::unique_ptr<SessionStore> store_;
    EventBroadcaster events_;
    std::unique_ptr<ObservationService> pipeline_;
    std::unique_ptr<httplib::Server> http_;
    std::thread thread_;
    std::atomic<bool> stopping_{false};
};

}  // namespace observer::service
