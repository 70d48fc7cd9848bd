#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "observer/captioner/model.hpp"
#include "observer/corpus/dataset.hpp"
#include "observer/feedback/feedback.hpp"
#include "observer/metrics/bleu.hpp"

namespace observer::metrics {

struct ItemScore {
    std::string image;
    std::string candidate;
    double meteor = 0.0;
};

struct MetricReport {
    double bleu_1 = 0.0;
    double bleu_2 = 0.0;
    double bleu_3 = 0.0;
    double bleu_4 = 0.0;
    double meteor = 0.0;  // mean per-item METEOR
    std::size_t corpus_size = 0;
    std::size_t excluded = 0;
    std::vector<ItemScore> per_item;
};

/// Corpus BLEU-1..4 and mean METEOR of candidates against their
/// reference sets.
MetricReport score_corpus(std::span<const Tokens> candidates,
                          std::span<const std::vector<Tokens>> references);

/// Captions every distinct image with decode_beam(k = cfg.beam_width) and
/// scores it against all dataset captions of that image. Images that fail
/// to decode are excluded and counted. Per-image decoding runs in parallel;
/// the report order follows first appearance in the dataset.
MetricReport evaluate_model(const captioner::CaptionerModel& model,
                            std::span<const corpus::CaptionedImage> dataset,
                            const feedback::AssessmentConfig& cfg = {});

/// {"bleu_1", "bleu_2", "bleu_3", "bleu_4", "meteor", "corpus_size"}
nlohmann::json to_json(const MetricReport& report);

}  // namespace observer::metrics
