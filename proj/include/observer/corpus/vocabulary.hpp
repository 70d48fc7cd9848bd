#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace observer::corpus {

using TokenId = std::int32_t;

/// Reserved ids shared by training and decoding.
namespace special {
inline constexpr TokenId kStart = 0;
inline constexpr TokenId kEnd = 1;
inline constexpr TokenId kPad = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr TokenId kCount = 4;
}  // namespace special

/// Captions are capped at this many ids, START and END included.
inline constexpr std::size_t kMaxCaptionTokens = 30;

struct CaptionedImage;

/// Token <-> id bijection over contiguous ids [0, size()).
class Vocabulary {
public:
    /// Only the four reserved tokens.
    Vocabulary();

    /// Tokens with frequency >= min_freq get ids from 4 upward, ordered by
    /// descending frequency and then by first appearance. Throws
    /// ValidationError on an empty caption list or min_freq < 1.
    static Vocabulary build(std::span<const std::string> captions, int min_freq = 1);
    static Vocabulary build(std::span<const CaptionedImage> dataset, int min_freq = 1);

    /// Rebuilds from an ordered id->token list (model files). The first four
    /// entries must be the reserved tokens.
    static Vocabulary from_tokens(std::vector<std::string> id_to_token, int min_freq);

    std::size_t size() const { return id_to_token_.size(); }
    int min_freq() const { return min_freq_; }

    /// kUnk when absent.
    TokenId id(std::string_view token) const;
    bool contains(std::string_view token) const;
    const std::string& token(TokenId id) const;
    const std::vector<std::string>& tokens() const { return id_to_token_; }

    /// [START, ids..., END]. Throws ValidationError when the text has no
    /// tokens after normalization.
    std::vector<TokenId> tokenize(std::string_view text) const;

    /// Drops START/END/PAD and joins the remaining tokens with spaces.
    std::string detokenize(std::span<const TokenId> ids) const;

    bool operator==(const Vocabulary& other) const { return id_to_token_ == other.id_to_token_; }

private:
    void add(std::string token);

    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, TokenId> token_to_id_;
    int min_freq_ = 1;
};

}  // namespace observer::corpus
