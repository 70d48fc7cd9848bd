#include "observer/captioner/serialize.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include <fmt/format.h>

#include "observer/error.hpp"

namespace observer::captioner {

namespace {

constexpr std::array<char, 8> kMagic{'O', 'B', 'S', 'C', 'A', 'P', 'T', '\0'};
constexpr std::array<char, 4> kTrailer{'E', 'N', 'D', '!'};

class Writer {
public:
    explicit Writer(std::ofstream& out) : out_(out) {}

    void raw(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }
    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void str(std::string_view s)
    {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }

private:
    std::ofstream& out_;
};

class Reader {
public:
    Reader(std::ifstream& in, const std::filesystem::path& path) : in_(in), path_(path) {}

    void raw(void* data, std::size_t n)
    {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) {
            throw FormatError(fmt::format("model file {} is truncated", path_.string()));
        }
    }
    std::uint32_t u32()
    {
        std::uint32_t v = 0;
        raw(&v, sizeof v);
        return v;
    }
    std::uint64_t u64()
    {
        std::uint64_t v = 0;
        raw(&v, sizeof v);
        return v;
    }
    std::string str(std::size_t limit = 1 << 20)
    {
        const std::uint32_t n = u32();
        if (n > limit) throw FormatError(fmt::format("model file {} is corrupt", path_.string()));
        std::string s(n, '\0');
        raw(s.data(), n);
        return s;
    }

private:
    std::ifstream& in_;
    const std::filesystem::path& path_;
};

}  // namespace

void save_model(const CaptionerModel& model, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write model file: " + path.string());
    Writer w(out);
    w.raw(kMagic.data(), kMagic.size());
    w.str(kModelFormatVersion);

    const ModelDims& d = model.dims();
    const std::array<std::uint64_t, 6> dims{d.base_width, d.input_side, d.hidden,
                                            d.embed,      d.attention,  model.vocab().size()};
    w.u32(static_cast<std::uint32_t>(dims.size()));
    for (const auto v : dims) w.u64(v);

    w.u32(static_cast<std::uint32_t>(model.vocab().min_freq()));
    w.u32(static_cast<std::uint32_t>(model.vocab().size()));
    for (const auto& token : model.vocab().tokens()) w.str(token);

    std::uint32_t count = 0;
    model.for_each_param([&](const Param<float>&) { ++count; });
    w.u32(count);
    model.for_each_param([&](const Param<float>& p) {
        w.str(p.name);
        w.u64(p.size());
        w.raw(p.value.data(), p.size() * sizeof(float));
    });
    w.raw(kTrailer.data(), kTrailer.size());
    if (!out) throw Error("failed writing model file: " + path.string());
}

CaptionerModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open model file: " + path.string());
    Reader r(in, path);

    std::array<char, 8> magic{};
    r.raw(magic.data(), magic.size());
    if (magic != kMagic) {
        throw FormatError(fmt::format("{} is not a captioner model file (expected format {})",
                                      path.string(), kModelFormatVersion));
    }
    const std::string version = r.str(256);
    if (version != kModelFormatVersion) {
        throw FormatError(fmt::format("model file {} has format '{}', expected '{}'",
                                      path.string(), version, kModelFormatVersion));
    }

    const std::uint32_t dim_count = r.u32();
    if (dim_count != 6) {
        throw FormatError(fmt::format("model file {}: dims block has {} fields, expected 6",
                                      path.string(), dim_count));
    }
    std::array<std::uint64_t, 6> dims{};
    for (auto& v : dims) {
        v = r.u64();
        if (v == 0 || v > (1u << 16)) {
            throw FormatError(fmt::format("model file {}: dims block is corrupt", path.string()));
        }
    }

    const auto min_freq = static_cast<int>(r.u32());
    const std::uint32_t vocab_size = r.u32();
    if (vocab_size != dims[5]) {
        throw FormatError(fmt::format("model file {}: vocabulary has {} tokens but dims say {}",
                                      path.string(), vocab_size, dims[5]));
    }
    std::vector<std::string> tokens;
    tokens.reserve(vocab_size);
    for (std::uint32_t i = 0; i < vocab_size; ++i) tokens.push_back(r.str(4096));

    ModelDims md;
    md.base_width = dims[0];
    md.input_side = dims[1];
    md.hidden = dims[2];
    md.embed = dims[3];
    md.attention = dims[4];
    CaptionerModel model = [&] {
        try {
            return CaptionerModel(corpus::Vocabulary::from_tokens(std::move(tokens), min_freq), md, 0);
        } catch (const ValidationError& e) {
            throw FormatError(fmt::format("model file {}: invalid dims ({})", path.string(), e.what()));
        }
    }();

    std::uint32_t expected = 0;
    model.for_each_param([&](const Param<float>&) { ++expected; });
    const std::uint32_t count = r.u32();
    if (count != expected) {
        throw FormatError(fmt::format("model file {}: {} parameter arrays, dims imply {}",
                                      path.string(), count, expected));
    }
    model.for_each_param([&](Param<float>& p) {
        const std::string name = r.str(4096);
        const std::uint64_t size = r.u64();
        if (name != p.name || size != p.size()) {
            throw FormatError(fmt::format(
                "model file {}: array '{}' of {} values does not match dims (expected '{}' of {})",
                path.string(), name, size, p.name, p.size()));
        }
        r.raw(p.value.data(), p.size() * sizeof(float));
    });
    std::array<char, 4> trailer{};
    r.raw(trailer.data(), trailer.size());
    if (trailer != kTrailer) {
        throw FormatError(fmt::format("model file {} is corrupt (bad trailer)", path.string()));
    }
    return model;
}

}  // namespace observer::captioner
