#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "observer/captioner/decoder.hpp"
#include "observer/captioner/encoder.hpp"
#include "observer/corpus/image.hpp"
#include "observer/corpus/vocabulary.hpp"

namespace observer::captioner {

struct ModelDims {
    std::size_t base_width = 8;
    std::size_t input_side = corpus::ImageTensor::kSide;
    std::size_t hidden = 128;
    std::size_t embed = 64;
    std::size_t attention = 64;

    bool operator==(const ModelDims&) const = default;
};

/// Encoder, attention decoder and the vocabulary they were trained with.
/// A model used for inference is never mutated and may be shared across
/// threads; training needs its own instance.
class CaptionerModel {
public:
    CaptionerModel(corpus::Vocabulary vocab, const ModelDims& dims, std::uint64_t seed);

    const corpus::Vocabulary& vocab() const { return vocab_; }
    const ModelDims& dims() const { return dims_; }
    std::size_t locations() const { return encoder_.locations(); }
    std::size_t grid_side() const { return encoder_.grid_side(); }
    std::size_t feature_dim() const { return encoder_.feature_dim(); }

    /// Throws ValidationError unless the tensor is input_side^2 x 3.
    FeatureGrid encode_image(const corpus::ImageTensor& image) const;

    AttentionOutput<float> attention_step(std::span<const float> hidden,
                                          const FeatureGrid& grid) const;

    ResidualEncoder<float>& encoder() { return encoder_; }
    const ResidualEncoder<float>& encoder() const { return encoder_; }
    AttentionDecoder<float>& decoder() { return decoder_; }
    const AttentionDecoder<float>& decoder() const { return decoder_; }

    /// Encoder parameters first, then decoder, in a fixed order.
    void for_each_param(const std::function<void(Param<float>&)>& fn);
    void for_each_param(const std::function<void(const Param<float>&)>& fn) const;
    std::size_t parameter_count() const;

    /// Content hash over dims, vocabulary and parameters, e.g.
    /// "captioner-v1:9f2c01aa77d3e410".
    std::string identity() const;

private:
    corpus::Vocabulary vocab_;
    ModelDims dims_;
    ResidualEncoder<float> encoder_;
    AttentionDecoder<float> decoder_;
};

}  // namespace observer::captioner
