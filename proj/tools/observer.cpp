#include <algorithm>
#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "observer/captioner/beam.hpp"
#include "observer/captioner/serialize.hpp"
#include "observer/captioner/train.hpp"
#include "observer/corpus/dataset.hpp"
#include "observer/corpus/synth.hpp"
#include "observer/corpus/text.hpp"
#include "observer/corpus/vocabulary.hpp"
#include "observer/error.hpp"
#include "observer/metrics/evaluate.hpp"
#include "observer/service/replay.hpp"
#include "observer/service/server.hpp"

namespace fs = std::filesystem;
using namespace observer;

namespace {

service::Server* g_server = nullptr;

void handle_signal(int)
{
    if (g_server) g_server->stop();
}

corpus::IngestResult load_dataset(const fs::path& dir)
{
    auto result = corpus::ingest_directory(dir);
    for (const auto& err : result.errors) {
        spdlog::warn("manifest row {}: {}", err.row, err.message);
    }
    if (result.records.empty()) throw ValidationError("no usable rows in " + dir.string());
    return result;
}

int cmd_synth(const fs::path& out, std::size_t count, std::uint64_t seed)
{
    const auto records = corpus::generate_synthetic_corpus(out, count, seed);
    fmt::print("wrote {} images to {}\n", records.size(), out.string());
    return 0;
}

int cmd_train(const fs::path& data, const fs::path& config, const fs::path& out)
{
    const auto cfg = config.empty() ? captioner::TrainConfig{} : captioner::load_train_config(config);
    cfg.validate();
    const auto dataset = load_dataset(data);
    const auto vocab = corpus::Vocabulary::build(dataset.records);
    fmt::print("{} samples, vocabulary {}, {} epochs\n", dataset.records.size(), vocab.size(),
               cfg.epochs);
    auto result = captioner::train(dataset.records, vocab, cfg, [](int epoch, double loss) {
        fmt::print("epoch {:4d}  loss {:.4f}\n", epoch, loss);
        std::fflush(stdout);
    });
    captioner::save_model(result.model, out);
    fmt::print("saved {} ({}) after {:.1f} s\n", out.string(), result.model.identity(),
               result.log.seconds);
    return 0;
}

int cmd_caption(const fs::path& model_file, const fs::path& image, int beam)
{
    const auto model = captioner::load_model(model_file);
    const auto grid = model.encode_image(corpus::preprocess_image(corpus::decode_image(image)));
    const auto result = captioner::decode_beam(model, grid, beam);
    std::vector<std::string> words;
    for (const auto id : result.caption) words.push_back(model.vocab().token(id));
    fmt::print("{}\n", corpus::join(words));
    const auto side = model.grid_side();
    for (std::size_t t = 0; t < result.attention.size(); ++t) {
        const auto& alpha = result.attention[t];
        const auto peak = static_cast<std::size_t>(
            std::max_element(alpha.begin(), alpha.end()) - alpha.begin());
        const auto token = t < result.caption.size() ? model.vocab().token(result.caption[t])
                                                     : model.vocab().token(corpus::special::kEnd);
        fmt::print("  {:>2}  {:<12} attention peak (row {}, col {}) weight {:.3f}\n", t + 1, token,
                   peak / side, peak % side, alpha[peak]);
    }
    return 0;
}

int cmd_eval(const fs::path& model_file, const fs::path& data, const fs::path& out, int beam)
{
    const auto model = captioner::load_model(model_file);
    const auto dataset = load_dataset(data);
    feedback::AssessmentConfig cfg;
    cfg.beam_width = beam;
    const auto report = metrics::evaluate_model(model, dataset.records, cfg);
    const auto json = metrics::to_json(report);
    std::ofstream file(out);
    file << json.dump(2) << '\n';
    if (!file) throw Error("cannot write " + out.string());
    fmt::print("{}\n", json.dump(2));
    if (report.excluded) fmt::print("{} undecodable images excluded\n", report.excluded);
    return 0;
}

int cmd_serve(const fs::path& config)
{
    const auto cfg = service::load_service_config(config);
    const auto addr = service::parse_listen_address(cfg.listen_address);
    service::Server server(cfg);
    const int port = server.bind(addr.host, addr.port);
    g_server = &server;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    spdlog::info("model {} / encoder {}", server.assessor().model_identity(),
                 server.assessor().encoder().identity());
    spdlog::info("listening on http://{}:{}", addr.host, port);
    server.run();
    g_server = nullptr;
    return 0;
}

int cmd_replay(const fs::path& events, const std::string& endpoint,
               const std::optional<std::string>& session, bool no_delay)
{
    service::ReplayOptions options{endpoint, session, !no_delay};
    const auto s = service::replay_events(events, options);
    fmt::print("session {}\nsubmitted {}  passed {}  retried {}  errored {}\n", s.session_id,
               s.submitted, s.passed, s.retried, s.errored);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"observer: caption-based observation assessment"};
    app.require_subcommand(1);

    auto* corpus_cmd = app.add_subcommand("corpus", "Dataset utilities");
    corpus_cmd->require_subcommand(1);
    auto* synth = corpus_cmd->add_subcommand("synth", "Generate the synthetic shape corpus");
    fs::path synth_out;
    std::size_t synth_count = 50;
    std::uint64_t synth_seed = 7;
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--count", synth_count, "Number of images")->capture_default_str();
    synth->add_option("--seed", synth_seed, "Random seed")->capture_default_str();

    auto* cap_cmd = app.add_subcommand("captioner", "Train or run the captioner");
    cap_cmd->require_subcommand(1);
    auto* train = cap_cmd->add_subcommand("train", "Train a model on a dataset directory");
    fs::path train_data, train_config, train_out;
    train->add_option("--data", train_data, "Directory with manifest.csv")->required();
    train->add_option("--config", train_config, "JSON training config (defaults otherwise)");
    train->add_option("--out", train_out, "Model file to write")->required();
    auto* caption = cap_cmd->add_subcommand("caption", "Caption one image");
    fs::path cap_model, cap_image;
    int cap_beam = captioner::kDefaultBeamWidth;
    caption->add_option("--model", cap_model)->required();
    caption->add_option("--image", cap_image)->required();
    caption->add_option("--beam", cap_beam, "Beam width")->capture_default_str();

    auto* metrics_cmd = app.add_subcommand("metrics", "Caption metrics");
    metrics_cmd->require_subcommand(1);
    auto* eval = metrics_cmd->add_subcommand("eval", "BLEU-1..4 and METEOR of a model on a dataset");
    fs::path eval_model, eval_data, eval_out = "report.json";
    int eval_beam = captioner::kDefaultBeamWidth;
    eval->add_option("--model", eval_model)->required();
    eval->add_option("--data", eval_data)->required();
    eval->add_option("--out", eval_out)->capture_default_str();
    eval->add_option("--beam", eval_beam)->capture_default_str();

    auto* serve = app.add_subcommand("serve", "Run the assessment service");
    fs::path serve_config;
    serve->add_option("--config", serve_config, "key = value config file")->required();

    auto* replay = app.add_subcommand("replay", "Replay an observation events file");
    fs::path replay_events;
    std::string replay_endpoint;
    std::optional<std::string> replay_session;
    bool replay_no_delay = false;
    replay->add_option("--events", replay_events)->required();
    replay->add_option("--endpoint", replay_endpoint, "e.g. http://127.0.0.1:8080")->required();
    replay->add_option("--session", replay_session, "Existing session id");
    replay->add_flag("--no-delay", replay_no_delay, "Ignore delay_ms");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(synth_out, synth_count, synth_seed);
        if (train->parsed()) return cmd_train(train_data, train_config, train_out);
        if (caption->parsed()) return cmd_caption(cap_model, cap_image, cap_beam);
        if (eval->parsed()) return cmd_eval(eval_model, eval_data, eval_out, eval_beam);
        if (serve->parsed()) return cmd_serve(serve_config);
        if (replay->parsed()) return cmd_replay(replay_events, replay_endpoint, replay_session, replay_no_delay);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 1;
}
