#pragma once

#include <memory>
#include <semaphore>

#include "observer/captioner/model.hpp"
#include "observer/corpus/image.hpp"
#include "observer/feedback/feedback.hpp"
#include "observer/semantics/encoder.hpp"
#include "observer/service/types.hpp"

namespace observer::service {

/// preprocess -> beam decode -> keywords of the generated caption ->
/// cosine(student, generated) -> feedback. latency_ms covers this call.
/// Throws ValidationError when the student caption has no words or the
/// model generates an empty caption.
AssessmentResult assess_observation(const Observation& obs, const corpus::RgbImage& image,
                                    const captioner::CaptionerModel& model,
                                    const semantics::SentenceEncoder& encoder,
                                    const feedback::AssessmentConfig& cfg);

/// Shares one immutable model and encoder between request threads; at most
/// `queue_width` assessments run at once, the rest wait their turn.
class Assessor {
public:
    static constexpr std::ptrdiff_t kMaxQueueWidth = 64;

    Assessor(std::shared_ptr<const captioner::CaptionerModel> model,
             std::shared_ptr<const semantics::SentenceEncoder> encoder,
             feedback::AssessmentConfig cfg, int queue_width = 1);

    /// Blocks for a queue slot; latency_ms includes the wait.
    AssessmentResult assess(const Observation& obs, const corpus::RgbImage& image);

    const captioner::CaptionerModel& model() const { return *model_; }
    const semantics::SentenceEncoder& encoder() const { return *encoder_; }
    const feedback::AssessmentConfig& config() const { return cfg_; }
    const std::string& model_identity() const { return model_identity_; }

private:
    std::shared_ptr<const captioner::CaptionerModel> model_;
    std::shared_ptr<const semantics::SentenceEncoder> encoder_;
    feedback::AssessmentConfig cfg_;
    std::string model_identity_;
    std::counting_semaphore<kMaxQueueWidth> slots_;
};

}  // namespace observer::service
