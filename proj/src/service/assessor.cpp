#include "observer/service/assessor.hpp"

#include <algorithm>
#include <chrono>

#include "observer/captioner/beam.hpp"
#include "observer/error.hpp"
#include "observer/semantics/keywords.hpp"

namespace observer::service {

namespace {

std::int64_t elapsed_ms(std::chrono::steady_clock::time_point since)
{
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                 since)
        .count();
}

AssessmentResult run_pipeline(const Observation& obs, const corpus::RgbImage& image,
                              const captioner::CaptionerModel& model,
                              const semantics::SentenceEncoder& encoder,
                              const feedback::AssessmentConfig& cfg)
{
    const auto student = encoder.embed(obs.caption);

    const auto tensor = corpus::preprocess_image(image);
    const auto generated = captioner::caption_image(model, tensor, cfg.beam_width);
    if (generated.empty()) throw ValidationError("the captioner produced an empty caption");

    const auto keywords = semantics::extract_keywords(encoder, generated, cfg.lambda_keywords);
    const double score = semantics::cosine_similarity(student, encoder.embed(generated));
    const auto fb = feedback::generate_feedback(score, keywords, cfg);

    AssessmentResult result;
    result.observation_id = obs.id;
    result.generated_caption = generated;
    result.score = fb.score;
    result.keywords = fb.keywords;
    result.verdict = fb.verdict;
    result.feedback_text = fb.text;
    result.encoder_identity = encoder.identity();
    return result;
}

}  // namespace

AssessmentResult assess_observation(const Observation& obs, const corpus::RgbImage& image,
                                    const captioner::CaptionerModel& model,
                                    const semantics::SentenceEncoder& encoder,
                                    const feedback::AssessmentConfig& cfg)
{
    const auto start = std::chrono::steady_clock::now();
    auto result = run_pipeline(obs, image, model, encoder, cfg);
    result.latency_ms = elapsed_ms(start);
    return result;
}

Assessor::Assessor(std::shared_ptr<const captioner::CaptionerModel> model,
                   std::shared_ptr<const semantics::SentenceEncoder> encoder,
                   feedback::AssessmentConfig cfg, int queue_width)
    : model_(std::move(model)),
      encoder_(std::move(encoder)),
      cfg_(cfg),
      slots_(std::clamp<std::ptrdiff_t>(queue_width, 1, kMaxQueueWidth))
{
    if (!model_ || !encoder_) throw ValidationError("assessor needs a model and an encoder");
    if (queue_width < 1 || queue_width > kMaxQueueWidth) {
        throw ValidationError("queue_width must be in [1, 64]");
    }
    cfg_.validate();
    model_identity_ = model_->identity();
}

AssessmentResult Assessor::assess(const Observation& obs, const corpus::RgbImage& image)
{
    const auto start = std::chrono::steady_clock::now();
    slots_.acquire();
    struct Release {
        std::counting_semaphore<kMaxQueueWidth>& s;
        ~Release() { s.release(); }
    } release{slots_};
    auto result = run_pipeline(obs, image, *model_, *encoder_, cfg_);
    result.latency_ms = elapsed_ms(start);
    return result;
}

}  // namespace observer::service
