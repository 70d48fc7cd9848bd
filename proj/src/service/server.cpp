#include "observer/service/server.hpp"

#include <array>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "observer/captioner/serialize.hpp"
#include "observer/error.hpp"
#include "observer/service/json.hpp"

namespace observer::service {

using nlohmann::json;

namespace {

constexpr auto kStreamPoll = std::chrono::seconds(5);

std::vector<std::uint8_t> base64_decode(std::string_view text)
{
    static const auto table = [] {
        std::array<int, 256> t{};
        t.fill(-1);
        const std::string_view alphabet =
            "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
        for (std::size_t i = 0; i < alphabet.size(); ++i) {
            t[static_cast<unsigned char>(alphabet[i])] = static_cast<int>(i);
        }
        return t;
    }();
    std::vector<std::uint8_t> out;
    out.reserve(text.size() * 3 / 4);
    std::uint32_t acc = 0;
    int bits = 0;
    for (char ch : text) {
        if (ch == '=') break;
        if (ch == '\n' || ch == '\r' || ch == ' ') continue;
        const int v = table[static_cast<unsigned char>(ch)];
        if (v < 0) throw ValidationError("image_base64 is not valid base64");
        acc = (acc << 6) | static_cast<std::uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
        }
    }
    return out;
}

void send_json(httplib::Response& res, int status, const json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message)
{
    send_json(res, status, json{{"error", message}});
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn)
{
    try {
        fn();
    } catch (const ValidationError& e) {
        send_error(res, 400, e.what());
    } catch (const NotFoundError& e) {
        send_error(res, 404, e.what());
    } catch (const ImageDecodeError& e) {
        send_error(res, 422, e.what());
    } catch (const std::exception& e) {
        spdlog::error("request failed: {}", e.what());
        send_error(res, 500, e.what());
    }
}

ObservationInput parse_request(const httplib::Request& req)
{
    if (req.is_multipart_form_data()) {
        if (!req.has_file("meta")) throw ValidationError("multipart body lacks a 'meta' part");
        if (!req.has_file("image")) throw ValidationError("multipart body lacks an 'image' part");
        json meta;
        try {
            meta = json::parse(req.get_file_value("meta").content);
        } catch (const json::exception& e) {
            throw ValidationError(std::string("meta is not valid JSON: ") + e.what());
        }
        auto input = parse_submission_meta(meta);
        const auto& image = req.get_file_value("image").content;
        input.image.assign(image.begin(), image.end());
        return input;
    }
    json body;
    try {
        body = json::parse(req.body);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("body is not valid JSON: ") + e.what());
    }
    auto input = parse_submission_meta(body);
    if (!body.contains("image_base64") || !body["image_base64"].is_string()) {
        throw ValidationError("missing field: image_base64");
    }
    input.image = base64_decode(body["image_base64"].get_ref<const std::string&>());
    return input;
}

}  // namespace

SessionEntry ObservationService::submit(const std::string& session_id, const ObservationInput& input)
{
    if (!store_.contains(session_id)) throw NotFoundError("unknown session: " + session_id);
    validate_submission(input);
    const Observation obs = store_.begin_observation(session_id, input);
    try {
        const auto image = corpus::decode_image(input.image);
        SessionEntry entry{obs, assessor_.assess(obs, image)};
        store_.append(entry, image);
        events_.publish(session_id, result_payload(entry).dump());
        return entry;
    } catch (const std::exception& e) {
        store_.reject({obs, e.what()});
        throw;
    }
}

Server::Server(const ServiceConfig& cfg)
    : Server(std::make_shared<const captioner::CaptionerModel>(captioner::load_model(cfg.model_path)),
             semantics::load_encoder(cfg.encoder_path), cfg)
{
}

Server::Server(std::shared_ptr<const captioner::CaptionerModel> model,
               std::shared_ptr<const semantics::SentenceEncoder> encoder, const ServiceConfig& cfg)
    : cfg_(cfg)
{
    cfg_.assessment.validate();
    assessor_ = std::make_unique<Assessor>(std::move(model), std::move(encoder), cfg_.assessment,
                                           cfg_.queue_width);
    store_ = std::make_unique<SessionStore>(cfg_.data_dir);
    pipeline_ = std::make_unique<ObservationService>(*assessor_, *store_, events_);
    http_ = std::make_unique<httplib::Server>();
    install_routes();
}

Server::~Server()
{
    stop();
}

void Server::install_routes()
{
    auto& http = *http_;

    http.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200,
                  json{{"status", "ok"},
                       {"model_identity", assessor_->model_identity()},
                       {"encoder_identity", assessor_->encoder().identity()}});
    });

    http.Post("/api/sessions", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 201, json{{"session_id", store_->create_session()}}); });
    });

    http.Post(R"(/api/sessions/([^/]+)/observations)",
              [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] {
                      const auto entry = pipeline_->submit(req.matches[1], parse_request(req));
                      send_json(res, 201, result_payload(entry));
                  });
              });

    http.Get(R"(/api/sessions/([^/]+)/observations)",
             [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] { send_json(res, 200, json(store_->snapshot(req.matches[1]).entries)); });
             });

    http.Get(R"(/api/sessions/([^/]+)/rejections)",
             [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] { send_json(res, 200, json(store_->rejections(req.matches[1]))); });
             });

    http.Get(R"(/api/sessions/([^/]+)/export)",
             [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] {
                     const std::string id = req.matches[1];
                     res.set_content(store_->export_archive(id), "application/zip");
                     res.set_header("Content-Disposition",
                                    "attachment; filename=\"" + id + ".zip\"");
                 });
             });

    http.Get(R"(/api/sessions/([^/]+)/stream)",
             [this](const httplib::Request& req, httplib::Response& res) {
                 const std::string id = req.matches[1];
                 if (!store_->contains(id)) {
                     send_error(res, 404, "unknown session: " + id);
                     return;
                 }
                 auto sub = events_.subscribe(id);
                 auto greeted = std::make_shared<bool>(false);
                 res.set_header("Cache-Control", "no-cache");
                 res.set_chunked_content_provider(
                     "text/event-stream",
                     [sub, greeted](std::size_t, httplib::DataSink& sink) {
                         if (!*greeted) {
                             *greeted = true;
                             const std::string hello = ": connected\n\n";
                             return sink.write(hello.data(), hello.size());
                         }
                         auto payload = sub->next(kStreamPoll);
                         if (!sink.is_writable()) return false;
                         if (!payload) {
                             if (sub->closed()) {
                                 sink.done();
                                 return true;
                             }
                             const std::string ping = ": ping\n\n";
                             return sink.write(ping.data(), ping.size());
                         }
                         const auto id_field = json::parse(*payload).at("observation_id").get<std::string>();
                         const std::string event =
                             "id: " + id_field + "\nevent: result\ndata: " + *payload + "\n\n";
                         return sink.write(event.data(), event.size());
                     },
                     [this, sub](bool) { events_.unsubscribe(sub); });
             });

    if (cfg_.static_dir) {
        if (!http.set_mount_point("/", cfg_.static_dir->string())) {
            spdlog::warn("static_dir {} does not exist; dashboard not served",
                         cfg_.static_dir->string());
        }
    }
}

int Server::bind(const std::string& host, int port)
{
    if (port == 0) {
        const int bound = http_->bind_to_any_port(host);
        if (bound < 0) throw TransportError("cannot bind " + host);
        return bound;
    }
    if (!http_->bind_to_port(host, port)) {
        throw TransportError(fmt::format("cannot bind {}:{}", host, port));
    }
    return port;
}

void Server::run()
{
    http_->listen_after_bind();
}

int Server::start(const std::string& host, int port)
{
    const int bound = bind(host, port);
    thread_ = std::thread([this] { run(); });
    http_->wait_until_ready();
    return bound;
}

void Server::stop()
{
    if (stopping_.exchange(true)) return;
    events_.close_all();
    if (http_) http_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace observer::service
