#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace observer::semantics {

/// Unit-L2 sentence embedding. Only constructible through normalize(), so
/// every instance satisfies the norm invariant.
class EmbeddingVector {
public:
    /// Throws ValidationError on a zero, empty or non-finite input.
    static EmbeddingVector normalize(std::vector<double> raw);

    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }

    bool operator==(const EmbeddingVector&) const = default;

private:
    std::vector<double> values_;
};

/// Pluggable text encoder. Implementations are immutable after
/// construction and safe to share across threads.
class SentenceEncoder {
public:
    virtual ~SentenceEncoder() = default;

    /// Throws ValidationError when the text has no tokens.
    virtual EmbeddingVector embed(std::string_view text) const = 0;
    virtual std::size_t dimension() const = 0;
    /// Provenance string echoed into every assessment.
    virtual std::string identity() const = 0;
};

/// Deterministic bag-of-words encoder used when no encoder artifact is
/// configured: every token adds its hashed word feature plus hashed
/// character trigrams. Word order never matters.
class HashingEncoder final : public SentenceEncoder {
public:
    explicit HashingEncoder(std::size_t dimension = 256);

    EmbeddingVector embed(std::string_view text) const override;
    std::size_t dimension() const override { return dimension_; }
    std::string identity() const override;

private:
    std::size_t dimension_;
};

/// Sentence encoder backed by a token embedding table on disk (GloVe /
/// word2vec text layout, optional "count dim" header line). A sentence is
/// the mean of its token vectors; unknown tokens get a fixed pseudo-random
/// vector derived from the token hash.
class EmbeddingTableEncoder final : public SentenceEncoder {
public:
    static std::unique_ptr<EmbeddingTableEncoder> load(const std::filesystem::path& file);

    EmbeddingVector embed(std::string_view text) const override;
    std::size_t dimension() const override { return dimension_; }
    std::string identity() const override { return identity_; }
    std::size_t table_size() const { return table_.size(); }

private:
    EmbeddingTableEncoder() = default;

    std::size_t dimension_ = 0;
    std::string identity_;
    std::unordered_map<std::string, std::vector<double>> table_;
};

/// Config value "stub" (or empty) selects HashingEncoder; anything else is
/// a path to an embedding table.
std::shared_ptr<const SentenceEncoder> load_encoder(const std::string& spec);

/// a.b / (|a||b|), clamped to [-1, 1]. Throws ValidationError on a
/// dimension mismatch.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace observer::semantics
