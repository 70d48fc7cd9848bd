#include "observer/captioner/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "observer/captioner/adam.hpp"
#include "observer/error.hpp"

namespace observer::captioner {

void TrainConfig::validate() const
{
    if (!(learning_rate > 0.0)) throw ValidationError("train: learning_rate must be > 0");
    if (epochs < 1) throw ValidationError("train: epochs must be >= 1");
    if (batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
    if (dims.base_width < 1 || dims.hidden < 1 || dims.embed < 1 || dims.attention < 1) {
        throw ValidationError("train: model dimensions must be >= 1");
    }
}

TrainConfig load_train_config(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) throw ValidationError("cannot open train config: " + file.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("train config is not valid JSON: " + std::string(e.what()));
    }
    TrainConfig cfg;
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.augment = j.value("augment", cfg.augment);
    cfg.grad_clip = j.value("grad_clip", cfg.grad_clip);
    if (j.contains("dims")) {
        const auto& d = j.at("dims");
        cfg.dims.base_width = d.value("base_width", cfg.dims.base_width);
        cfg.dims.hidden = d.value("hidden", cfg.dims.hidden);
        cfg.dims.embed = d.value("embed", cfg.dims.embed);
        cfg.dims.attention = d.value("attention", cfg.dims.attention);
    }
    cfg.validate();
    return cfg;
}

TrainResult train(std::span<const corpus::CaptionedImage> dataset,
                  const corpus::Vocabulary& vocab, const TrainConfig& cfg,
                  const EpochCallback& on_epoch)
{
    cfg.validate();
    if (dataset.empty()) throw ValidationError("train: empty dataset");
    const auto started = std::chrono::steady_clock::now();

    std::vector<corpus::ImageTensor> images;
    std::vector<std::vector<corpus::TokenId>> captions;
    images.reserve(dataset.size());
    captions.reserve(dataset.size());
    for (const auto& item : dataset) {
        images.push_back(corpus::preprocess_image(corpus::decode_image(item.image_ref)));
        auto ids = vocab.tokenize(item.caption);
        if (ids.size() > corpus::kMaxCaptionTokens) {
            ids.resize(corpus::kMaxCaptionTokens - 1);
            ids.push_back(corpus::special::kEnd);
        }
        captions.push_back(std::move(ids));
    }

    TrainResult result{CaptionerModel(vocab, cfg.dims, cfg.seed), {}};
    CaptionerModel& model = result.model;
    std::vector<Param<float>*> params;
    model.for_each_param([&](Param<float>& p) { params.push_back(&p); });
    Adam<float> optimizer(cfg.learning_rate);
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto batch = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t end = std::min(order.size(), start + batch);
            for (auto* p : params) p->zero_grad();
            for (std::size_t pos = start; pos < end; ++pos) {
                const std::size_t i = order[pos];
                const auto planes = to_planes<float>(
                    cfg.augment ? corpus::augment(images[i], rng) : images[i]);
                EncoderCache<float> cache;
                const auto grid = model.encoder().forward(planes, &cache);
                FeatureGrid grad_grid;
                const float loss = model.decoder().loss_and_backward(grid, captions[i], &grad_grid);
                if (!std::isfinite(loss)) {
                    throw TrainingError(fmt::format(
                        "train: non-finite loss at epoch {} step {} (sample {})", epoch,
                        optimizer.steps() + 1, i));
                }
                model.encoder().backward(cache, grad_grid);
                epoch_total += loss;
            }
            const auto scale = 1.0f / static_cast<float>(end - start);
            const auto clip = static_cast<float>(cfg.grad_clip);
            for (auto* p : params) {
                for (auto& g : p->grad) {
                    g *= scale;
                    if (clip > 0.0f) g = std::clamp(g, -clip, clip);
                }
            }
            optimizer.step(params);
        }
        const double mean = epoch_total / static_cast<double>(order.size());
        result.log.epoch_loss.push_back(mean);
        if (on_epoch) on_epoch(epoch, mean);
    }
    result.log.steps = optimizer.steps();
    result.log.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

}  // namespace observer::captioner
