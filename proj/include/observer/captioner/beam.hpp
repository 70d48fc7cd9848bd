#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <vector>

#include "observer/captioner/model.hpp"
#include "observer/corpus/vocabulary.hpp"
#include "observer/error.hpp"

namespace observer::captioner {

/// Default beam width.
inline constexpr int kDefaultBeamWidth = 3;
/// Generated tokens per caption (END included); START is implicit.
inline constexpr std::size_t kMaxDecodeSteps = corpus::kMaxCaptionTokens - 1;

template <typename State>
struct StepScores {
    std::vector<double> log_probs;  // one per vocabulary id
    std::vector<float> attention;   // weights over grid locations
    State next;
};

/// A source of next-token log-probabilities. The model adapter below is the
/// production implementation; tests plug in hand-written tables.
template <typename S>
concept Stepper = requires(const S& s, const typename S::State& st, corpus::TokenId t) {
    { s.initial() } -> std::same_as<typename S::State>;
    { s.advance(st, t) } -> std::same_as<StepScores<typename S::State>>;
    { s.vocab_size() } -> std::convertible_to<std::size_t>;
};

struct Hypothesis {
    std::vector<corpus::TokenId> tokens;  // generated ids, END included when emitted
    double log_prob = 0.0;
    std::vector<std::vector<float>> attention;

    /// Sum of token log-probabilities over the number of generated tokens.
    double normalized_score() const
    {
        return tokens.empty() ? log_prob : log_prob / static_cast<double>(tokens.size());
    }
};

struct DecodeResult {
    std::vector<corpus::TokenId> caption;  // START/END stripped
    std::vector<std::vector<float>> attention;  // one weight vector per generated token
    double score = 0.0;
    std::vector<Hypothesis> finished;  // every hypothesis the beam finalized
};

/// START and PAD are never generated.
inline bool emittable(corpus::TokenId id)
{
    return id != corpus::special::kStart && id != corpus::special::kPad;
}

namespace detail {

inline bool better(double score_a, const std::vector<corpus::TokenId>& a, double score_b,
                   const std::vector<corpus::TokenId>& b)
{
    if (score_a != score_b) return score_a > score_b;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline DecodeResult finish(std::vector<Hypothesis> finished)
{
    DecodeResult result;
    if (finished.empty()) return result;
    const Hypothesis* best = &finished.front();
    for (const auto& h : finished) {
        if (better(h.normalized_score(), h.tokens, best->normalized_score(), best->tokens)) {
            best = &h;
        }
    }
    result.caption = best->tokens;
    if (!result.caption.empty() && result.caption.back() == corpus::special::kEnd) {
        result.caption.pop_back();
    }
    result.attention = best->attention;
    result.score = best->normalized_score();
    result.finished = std::move(finished);
    return result;
}

}  // namespace detail

/// Beam search keeping the `k` highest cumulative log-probability partial
/// sequences. A hypothesis is finalized when it emits END or reaches
/// `max_steps` tokens; each finalization shrinks the live beam by one. The
/// returned caption is the finalized hypothesis with the best length
/// normalized score. Ties at every stage go to the lexicographically smaller
/// id sequence, so lower ids win.
template <Stepper S>
DecodeResult decode_beam(const S& stepper, int k, std::size_t max_steps = kMaxDecodeSteps)
{
    if (k < 1) throw ValidationError("decode_beam: beam width must be >= 1");
    if (max_steps < 1) throw ValidationError("decode_beam: max_steps must be >= 1");
    using State = typename S::State;

    struct Live {
        Hypothesis hyp;
        State state;
    };
    struct Candidate {
        std::size_t parent;
        corpus::TokenId token;
        double log_prob;
        std::vector<corpus::TokenId> tokens;
    };

    std::vector<Live> live;
    live.push_back({Hypothesis{}, stepper.initial()});
    std::vector<Hypothesis> finished;
    auto remaining = static_cast<std::size_t>(k);

    for (std::size_t step = 0; step < max_steps && !live.empty(); ++step) {
        std::vector<StepScores<State>> outputs;
        outputs.reserve(live.size());
        std::vector<Candidate> candidates;
        for (std::size_t p = 0; p < live.size(); ++p) {
            const corpus::TokenId input = live[p].hyp.tokens.empty() ? corpus::special::kStart
                                                                     : live[p].hyp.tokens.back();
            outputs.push_back(stepper.advance(live[p].state, input));
            const auto& lp = outputs.back().log_probs;
            for (std::size_t v = 0; v < stepper.vocab_size(); ++v) {
                const auto id = static_cast<corpus::TokenId>(v);
                if (!emittable(id)) continue;
                Candidate c{p, id, live[p].hyp.log_prob + lp[v], live[p].hyp.tokens};
                c.tokens.push_back(id);
                candidates.push_back(std::move(c));
            }
        }
        const std::size_t keep = std::min(remaining, candidates.size());
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<long>(keep),
                          candidates.end(), [](const Candidate& a, const Candidate& b) {
                              return detail::better(a.log_prob, a.tokens, b.log_prob, b.tokens);
                          });

        std::vector<Live> next;
        const bool last_step = step + 1 == max_steps;
        for (std::size_t i = 0; i < keep; ++i) {
            Candidate& c = candidates[i];
            Hypothesis hyp;
            hyp.tokens = std::move(c.tokens);
            hyp.log_prob = c.log_prob;
            hyp.attention = live[c.parent].hyp.attention;
            hyp.attention.push_back(outputs[c.parent].attention);
            if (c.token == corpus::special::kEnd || last_step) {
                finished.push_back(std::move(hyp));
                --remaining;
            } else {
                next.push_back({std::move(hyp), outputs[c.parent].next});
            }
        }
        live = std::move(next);
    }
    return detail::finish(std::move(finished));
}

/// Argmax decoding (lowest id on ties) until END or `max_steps`.
template <Stepper S>
DecodeResult decode_greedy(const S& stepper, std::size_t max_steps = kMaxDecodeSteps)
{
    Hypothesis hyp;
    auto state = stepper.initial();
    for (std::size_t step = 0; step < max_steps; ++step) {
        const corpus::TokenId input =
            hyp.tokens.empty() ? corpus::special::kStart : hyp.tokens.back();
        auto out = stepper.advance(state, input);
        corpus::TokenId best = -1;
        for (std::size_t v = 0; v < stepper.vocab_size(); ++v) {
            const auto id = static_cast<corpus::TokenId>(v);
            if (!emittable(id)) continue;
            if (best < 0 || out.log_probs[v] > out.log_probs[static_cast<std::size_t>(best)]) {
                best = id;
            }
        }
        hyp.tokens.push_back(best);
        hyp.log_prob += out.log_probs[static_cast<std::size_t>(best)];
        hyp.attention.push_back(std::move(out.attention));
        state = std::move(out.next);
        if (best == corpus::special::kEnd) break;
    }
    return detail::finish({std::move(hyp)});
}

/// Adapts a model and an encoded image to the Stepper interface.
class ModelStepper {
public:
    using State = LstmState<float>;

    ModelStepper(const CaptionerModel& model, const FeatureGrid& grid);

    State initial() const;
    StepScores<State> advance(const State& state, corpus::TokenId input) const;
    std::size_t vocab_size() const { return model_.vocab().size(); }

private:
    const CaptionerModel& model_;
    const FeatureGrid& grid_;
    AttentionKeys<float> keys_;
};

/// Beam search over the model for one encoded image.
DecodeResult decode_beam(const CaptionerModel& model, const FeatureGrid& grid,
                         int k = kDefaultBeamWidth);
DecodeResult decode_greedy(const CaptionerModel& model, const FeatureGrid& grid);

/// encode -> beam search -> detokenized caption text.
std::string caption_image(const CaptionerModel& model, const corpus::ImageTensor& image,
                          int k = kDefaultBeamWidth);

}  // namespace observer::captioner
