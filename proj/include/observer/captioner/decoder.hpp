#pragma once

#include <functional>
#include <random>
#include <span>
#include <vector>

#include "observer/captioner/feature_grid.hpp"
#include "observer/captioner/param.hpp"
#include "observer/corpus/vocabulary.hpp"

namespace observer::captioner {

struct DecoderDims {
    std::size_t feature_dim = 64;
    std::size_t hidden = 128;
    std::size_t embed = 64;
    std::size_t attention = 64;
    std::size_t vocab = 0;

    bool operator==(const DecoderDims&) const = default;
};

/// Soft attention weights over grid locations plus the weighted context.
template <typename T>
struct AttentionOutput {
    std::vector<T> weights;  // length L, a probability vector
    std::vector<T> context;  // length D
};

/// Normalizes alignment scores with a stable softmax and returns the
/// weighted sum of grid rows.
template <typename T>
AttentionOutput<T> attend(std::span<const T> scores, const FeatureGridT<T>& grid);

/// Per-image projection of grid rows into attention space (W_f f_l + b),
/// computed once and reused at every decode step.
template <typename T>
struct AttentionKeys {
    std::size_t locations = 0;
    std::vector<T> values;  // L x A
};

template <typename T>
struct LstmState {
    std::vector<T> hidden;
    std::vector<T> cell;
};

template <typename T>
struct StepOutput {
    AttentionOutput<T> attention;
    std::vector<T> logits;  // length |V|
    LstmState<T> state;
};

/// LSTM decoder with additive attention over the encoder grid. At each step
/// the previous hidden state scores every location, the attended context is
/// concatenated with the previous token embedding as LSTM input, and the new
/// hidden state is projected to vocabulary logits.
template <typename T>
class AttentionDecoder {
public:
    AttentionDecoder() = default;
    explicit AttentionDecoder(const DecoderDims& dims);

    void initialize(std::mt19937_64& rng);

    const DecoderDims& dims() const { return dims_; }

    AttentionKeys<T> project_keys(const FeatureGridT<T>& grid) const;

    /// v . tanh(keys_l + W_h h) for every location.
    std::vector<T> alignment_scores(const AttentionKeys<T>& keys, std::span<const T> hidden) const;

    AttentionOutput<T> attention_step(std::span<const T> hidden, const FeatureGridT<T>& grid) const;

    /// h0, c0 from the mean grid feature.
    LstmState<T> initial_state(const FeatureGridT<T>& grid) const;

    StepOutput<T> step(const FeatureGridT<T>& grid, const AttentionKeys<T>& keys,
                       const LstmState<T>& state, corpus::TokenId input) const;

    /// Teacher-forced mean cross-entropy of `tokens` (START ... END) given the
    /// grid. When `grad_grid` is non-null, parameter gradients are accumulated
    /// and dLoss/dGrid is written to it.
    T loss_and_backward(const FeatureGridT<T>& grid, std::span<const corpus::TokenId> tokens,
                        FeatureGridT<T>* grad_grid);

    T loss(const FeatureGridT<T>& grid, std::span<const corpus::TokenId> tokens) const;

    void for_each_param(const std::function<void(Param<T>&)>& fn);
    void for_each_param(const std::function<void(const Param<T>&)>& fn) const;

    Param<T>& embedding() { return embedding_; }
    Param<T>& attention_vector() { return att_v_; }
    Param<T>& output_weight() { return out_w_; }

private:
    struct StepCache;

    StepOutput<T> forward_step(const FeatureGridT<T>& grid, const AttentionKeys<T>& keys,
                               const LstmState<T>& state, corpus::TokenId input,
                               StepCache* cache) const;

    T run_sequence(const FeatureGridT<T>& grid, std::span<const corpus::TokenId> tokens,
                   std::vector<StepCache>* caches, LstmState<T>* initial) const;

    DecoderDims dims_;
    Param<T> embedding_;
    Param<T> att_feat_w_;
    Param<T> att_feat_b_;
    Param<T> att_hid_w_;
    Param<T> att_v_;
    Param<T> init_h_w_;
    Param<T> init_h_b_;
    Param<T> init_c_w_;
    Param<T> init_c_b_;
    Param<T> lstm_x_w_;
    Param<T> lstm_h_w_;
    Param<T> lstm_b_;
    Param<T> out_w_;
    Param<T> out_b_;
};

}  // namespace observer::captioner
