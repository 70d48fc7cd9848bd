#include "observer/semantics/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "observer/corpus/text.hpp"
#include "observer/error.hpp"

namespace observer::semantics {

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 1469598103934665603ULL)
{
    std::uint64_t h = seed;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<std::string> checked_tokens(std::string_view text)
{
    auto tokens = corpus::normalize_tokens(text);
    if (tokens.empty()) throw ValidationError("embed: text is empty after normalization");
    return tokens;
}

}  // namespace

EmbeddingVector EmbeddingVector::normalize(std::vector<double> raw)
{
    if (raw.empty()) throw ValidationError("embedding: empty vector");
    double norm = 0.0;
    for (const double v : raw) {
        if (!std::isfinite(v)) throw ValidationError("embedding: non-finite component");
        norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) throw ValidationError("embedding: zero vector");
    for (auto& v : raw) v /= norm;
    EmbeddingVector out;
    out.values_ = std::move(raw);
    return out;
}

HashingEncoder::HashingEncoder(std::size_t dimension) : dimension_(dimension)
{
    if (dimension == 0) throw ValidationError("hashing encoder: dimension must be >= 1");
}

EmbeddingVector HashingEncoder::embed(std::string_view text) const
{
    std::vector<double> v(dimension_, 0.0);
    for (const auto& token : checked_tokens(text)) {
        v[fnv1a("w:" + token) % dimension_] += 1.0;
        const std::string padded = "<" + token + ">";
        for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
            v[fnv1a("c:" + padded.substr(i, 3)) % dimension_] += 0.35;
        }
    }
    return EmbeddingVector::normalize(std::move(v));
}

std::string HashingEncoder::identity() const
{
    return fmt::format("hashing-stub-v1:dim={}", dimension_);
}

std::unique_ptr<EmbeddingTableEncoder> EmbeddingTableEncoder::load(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) throw NotFoundError("cannot open embedding table: " + file.string());
    std::unique_ptr<EmbeddingTableEncoder> enc(new EmbeddingTableEncoder());
    std::uint64_t content_hash = 1469598103934665603ULL;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        content_hash = fnv1a(line, content_hash);
        std::istringstream fields(line);
        std::string token;
        if (!(fields >> token)) continue;
        std::vector<double> values;
        double x = 0;
        while (fields >> x) values.push_back(x);
        if (line_no == 1 && values.size() == 1 && std::all_of(token.begin(), token.end(), ::isdigit)) {
            continue;  // "count dim" header
        }
        if (values.empty()) {
            throw FormatError(fmt::format("embedding table {} line {}: no values", file.string(), line_no));
        }
        if (enc->dimension_ == 0) enc->dimension_ = values.size();
        if (values.size() != enc->dimension_) {
            throw FormatError(fmt::format("embedding table {} line {}: {} values, expected {}",
                                          file.string(), line_no, values.size(), enc->dimension_));
        }
        enc->table_.emplace(corpus::normalize_text(token), std::move(values));
    }
    if (enc->table_.empty()) throw FormatError("embedding table is empty: " + file.string());
    enc->identity_ = fmt::format("embedding-table:{}:dim={}:{:016x}", file.filename().string(),
                                 enc->dimension_, content_hash);
    return enc;
}

EmbeddingVector EmbeddingTableEncoder::embed(std::string_view text) const
{
    const auto tokens = checked_tokens(text);
    std::vector<double> sum(dimension_, 0.0);
    for (const auto& token : tokens) {
        if (const auto it = table_.find(token); it != table_.end()) {
            for (std::size_t i = 0; i < dimension_; ++i) sum[i] += it->second[i];
            continue;
        }
        std::mt19937_64 rng(fnv1a(token));
        std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(dimension_)));
        for (auto& s : sum) s += dist(rng);
    }
    for (auto& s : sum) s /= static_cast<double>(tokens.size());
    return EmbeddingVector::normalize(std::move(sum));
}

std::shared_ptr<const SentenceEncoder> load_encoder(const std::string& spec)
{
    if (spec.empty() || spec == "stub") return std::make_shared<HashingEncoder>();
    return EmbeddingTableEncoder::load(spec);
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b)
{
    if (a.size() != b.size()) {
        throw ValidationError(fmt::format("cosine_similarity: dimensions differ ({} vs {})",
                                          a.size(), b.size()));
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a.values()[i] * b.values()[i];
        na += a.values()[i] * a.values()[i];
        nb += b.values()[i] * b.values()[i];
    }
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

}  // namespace observer::semantics
