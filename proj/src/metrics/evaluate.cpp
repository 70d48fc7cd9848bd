#include "observer/metrics/evaluate.hpp"

#include <map>
#include <optional>

#include <spdlog/spdlog.h>

#include "observer/captioner/beam.hpp"
#include "observer/corpus/text.hpp"
#include "observer/error.hpp"
#include "observer/metrics/meteor.hpp"

namespace observer::metrics {

MetricReport score_corpus(std::span<const Tokens> candidates,
                          std::span<const std::vector<Tokens>> references)
{
    if (candidates.size() != references.size()) {
        throw ValidationError("score_corpus: candidate and reference counts differ");
    }
    if (candidates.empty()) throw ValidationError("score_corpus: empty corpus");
    BleuStats stats;
    MetricReport report;
    double meteor_sum = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        stats.add(candidates[i], references[i]);
        const double m = meteor(candidates[i], references[i]);
        meteor_sum += m;
        report.per_item.push_back({"", corpus::join(candidates[i]), m});
    }
    report.bleu_1 = stats.score(1);
    report.bleu_2 = stats.score(2);
    report.bleu_3 = stats.score(3);
    report.bleu_4 = stats.score(4);
    report.meteor = meteor_sum / static_cast<double>(candidates.size());
    report.corpus_size = candidates.size();
    return report;
}

MetricReport evaluate_model(const captioner::CaptionerModel& model,
                            std::span<const corpus::CaptionedImage> dataset,
                            const feedback::AssessmentConfig& cfg)
{
    cfg.validate();
    if (dataset.empty()) throw ValidationError("evaluate_model: empty dataset");

    std::vector<std::string> images;
    std::map<std::string, std::size_t> index;
    std::vector<std::vector<Tokens>> references;
    for (const auto& item : dataset) {
        const auto key = item.image_ref.string();
        auto [it, inserted] = index.emplace(key, images.size());
        if (inserted) {
            images.push_back(key);
            references.emplace_back();
        }
        references[it->second].push_back(corpus::normalize_tokens(item.caption));
    }

    std::vector<std::optional<Tokens>> generated(images.size());
    const auto count = static_cast<long>(images.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) {
        const auto slot = static_cast<std::size_t>(i);
        try {
            const auto tensor = corpus::preprocess_image(corpus::decode_image(images[slot]));
            const auto grid = model.encode_image(tensor);
            const auto result = captioner::decode_beam(model, grid, cfg.beam_width);
            generated[slot] = corpus::normalize_tokens(model.vocab().detokenize(result.caption));
        } catch (const ImageDecodeError&) {
            generated[slot].reset();
        }
    }

    std::vector<Tokens> candidates;
    std::vector<std::vector<Tokens>> kept_refs;
    std::vector<std::string> kept_images;
    std::size_t excluded = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (!generated[i]) {
            spdlog::warn("evaluate: excluded undecodable image {}", images[i]);
            ++excluded;
            continue;
        }
        // An empty caption (END first) still counts; it scores as a one-token miss.
        candidates.push_back(generated[i]->empty() ? Tokens{"<empty>"} : *generated[i]);
        kept_refs.push_back(references[i]);
        kept_images.push_back(images[i]);
    }
    if (candidates.empty()) throw ValidationError("evaluate_model: every image failed to decode");
    MetricReport report = score_corpus(candidates, kept_refs);
    for (std::size_t i = 0; i < kept_images.size(); ++i) report.per_item[i].image = kept_images[i];
    report.excluded = excluded;
    return report;
}

nlohmann::json to_json(const MetricReport& report)
{
    return nlohmann::json{{"bleu_1", report.bleu_1}, {"bleu_2", report.bleu_2},
                          {"bleu_3", report.bleu_3}, {"bleu_4", report.bleu_4},
                          {"meteor", report.meteor}, {"corpus_size", report.corpus_size}};
}

}  // namespace observer::metrics
