#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "observer/captioner/model.hpp"
#include "observer/corpus/dataset.hpp"
#include "observer/corpus/vocabulary.hpp"

namespace observer::captioner {

struct TrainConfig {
    double learning_rate = 3e-4;
    int epochs = 150;
    int batch_size = 1;
    std::uint64_t seed = 0;
    bool augment = true;
    /// Element-wise gradient clip; <= 0 disables it.
    double grad_clip = 5.0;
    ModelDims dims;

    /// Throws ValidationError on out-of-range fields.
    void validate() const;
};

/// Reads a JSON object whose keys mirror TrainConfig (dims nested under
/// "dims"); absent keys keep their defaults.
TrainConfig load_train_config(const std::filesystem::path& file);

struct TrainLog {
    std::vector<double> epoch_loss;  // mean per-sample loss for each epoch
    long steps = 0;
    double seconds = 0.0;
};

/// Called after every epoch with the 1-based epoch number and its mean loss.
using EpochCallback = std::function<void(int epoch, double mean_loss)>;

struct TrainResult {
    CaptionerModel model;
    TrainLog log;
};

/// Teacher-forced cross-entropy training with Adam. Images are preprocessed
/// once; each visit re-samples the augmentation. Deterministic in cfg.seed.
/// Throws ValidationError on an empty dataset and TrainingError when the
/// loss becomes non-finite.
TrainResult train(std::span<const corpus::CaptionedImage> dataset,
                  const corpus::Vocabulary& vocab, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

}  // namespace observer::captioner
