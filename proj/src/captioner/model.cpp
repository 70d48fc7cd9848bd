#include "observer/captioner/model.hpp"

#include <cstring>

#include <fmt/format.h>

#include "observer/error.hpp"

namespace observer::captioner {

namespace {

struct Fnv1a {
    std::uint64_t state = 1469598103934665603ULL;

    void bytes(const void* data, std::size_t n)
    {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state ^= p[i];
            state *= 1099511628211ULL;
        }
    }
};

}  // namespace

CaptionerModel::CaptionerModel(corpus::Vocabulary vocab, const ModelDims& dims,
                               std::uint64_t seed)
    : vocab_(std::move(vocab)),
      dims_(dims),
      encoder_(dims.base_width, dims.input_side),
      decoder_(DecoderDims{encoder_.feature_dim(), dims.hidden, dims.embed, dims.attention,
                           vocab_.size()})
{
    std::mt19937_64 rng(seed);
    encoder_.initialize(rng);
    decoder_.initialize(rng);
}

FeatureGrid CaptionerModel::encode_image(const corpus::ImageTensor& image) const
{
    const auto side = static_cast<int>(dims_.input_side);
    if (image.width != side || image.height != side ||
        image.data.size() != static_cast<std::size_t>(side) * side * 3) {
        throw ValidationError(fmt::format("encode_image: expected {0}x{0}x3 tensor, got {1}x{2}",
                                          side, image.width, image.height));
    }
    return encoder_.forward(to_planes<float>(image));
}

AttentionOutput<float> CaptionerModel::attention_step(std::span<const float> hidden,
                                                      const FeatureGrid& grid) const
{
    return decoder_.attention_step(hidden, grid);
}

void CaptionerModel::for_each_param(const std::function<void(Param<float>&)>& fn)
{
    encoder_.for_each_param(fn);
    decoder_.for_each_param(fn);
}

void CaptionerModel::for_each_param(const std::function<void(const Param<float>&)>& fn) const
{
    encoder_.for_each_param(fn);
    decoder_.for_each_param(fn);
}

std::size_t CaptionerModel::parameter_count() const
{
    std::size_t n = 0;
    for_each_param([&](const Param<float>& p) { n += p.size(); });
    return n;
}

std::string CaptionerModel::identity() const
{
    Fnv1a hash;
    for (const std::size_t v : {dims_.base_width, dims_.input_side, dims_.hidden, dims_.embed,
                                dims_.attention}) {
        const auto u = static_cast<std::uint64_t>(v);
        hash.bytes(&u, sizeof u);
    }
    for (const auto& token : vocab_.tokens()) hash.bytes(token.data(), token.size() + 1);
    for_each_param([&](const Param<float>& p) {
        hash.bytes(p.value.data(), p.value.size() * sizeof(float));
    });
    return fmt::format("captioner-v1:{:016x}", hash.state);
}

}  // namespace observer::captioner
