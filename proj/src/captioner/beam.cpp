#include "observer/captioner/beam.hpp"

namespace observer::captioner {

ModelStepper::ModelStepper(const CaptionerModel& model, const FeatureGrid& grid)
    : model_(model), grid_(grid), keys_(model.decoder().project_keys(grid))
{
}

ModelStepper::State ModelStepper::initial() const
{
    return model_.decoder().initial_state(grid_);
}

StepScores<ModelStepper::State> ModelStepper::advance(const State& state,
                                                      corpus::TokenId input) const
{
    auto out = model_.decoder().step(grid_, keys_, state, input);
    StepScores<State> scores;
    const float peak = *std::max_element(out.logits.begin(), out.logits.end());
    double z = 0;
    for (const float v : out.logits) z += std::exp(static_cast<double>(v - peak));
    const double log_z = static_cast<double>(peak) + std::log(z);
    scores.log_probs.resize(out.logits.size());
    for (std::size_t v = 0; v < out.logits.size(); ++v) {
        scores.log_probs[v] = static_cast<double>(out.logits[v]) - log_z;
    }
    scores.attention = std::move(out.attention.weights);
    scores.next = std::move(out.state);
    return scores;
}

DecodeResult decode_beam(const CaptionerModel& model, const FeatureGrid& grid, int k)
{
    return decode_beam(ModelStepper(model, grid), k);
}

DecodeResult decode_greedy(const CaptionerModel& model, const FeatureGrid& grid)
{
    return decode_greedy(ModelStepper(model, grid));
}

std::string caption_image(const CaptionerModel& model, const corpus::ImageTensor& image, int k)
{
    const auto grid = model.encode_image(image);
    return model.vocab().detokenize(decode_beam(model, grid, k).caption);
}

}  // namespace observer::captioner
