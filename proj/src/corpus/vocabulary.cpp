#include "observer/corpus/vocabulary.hpp"

#include <algorithm>

#include "observer/corpus/dataset.hpp"
#include "observer/corpus/text.hpp"
#include "observer/error.hpp"

namespace observer::corpus {

namespace {

const std::vector<std::string>& reserved_tokens()
{
    static const std::vector<std::string> tokens{"<start>", "<end>", "<pad>", "<unk>"};
    return tokens;
}

}  // namespace

Vocabulary::Vocabulary()
{
    for (const auto& t : reserved_tokens()) add(t);
}

void Vocabulary::add(std::string token)
{
    const auto id = static_cast<TokenId>(id_to_token_.size());
    token_to_id_.emplace(token, id);
    id_to_token_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(std::span<const std::string> captions, int min_freq)
{
    if (captions.empty()) throw ValidationError("vocabulary: empty dataset");
    if (min_freq < 1) throw ValidationError("vocabulary: min_freq must be >= 1");

    struct Count {
        std::string token;
        std::size_t first_seen;
        int freq;
    };
    std::vector<Count> counts;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& caption : captions) {
        for (auto& token : normalize_tokens(caption)) {
            auto [it, inserted] = index.emplace(token, counts.size());
            if (inserted) {
                counts.push_back({std::move(token), counts.size(), 0});
            }
            ++counts[it->second].freq;
        }
    }
    std::stable_sort(counts.begin(), counts.end(), [](const Count& a, const Count& b) {
        if (a.freq != b.freq) return a.freq > b.freq;
        return a.first_seen < b.first_seen;
    });

    Vocabulary vocab;
    vocab.min_freq_ = min_freq;
    for (auto& c : counts) {
        if (c.freq >= min_freq) vocab.add(std::move(c.token));
    }
    return vocab;
}

Vocabulary Vocabulary::build(std::span<const CaptionedImage> dataset, int min_freq)
{
    std::vector<std::string> captions;
    captions.reserve(dataset.size());
    for (const auto& item : dataset) captions.push_back(item.caption);
    return build(captions, min_freq);
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> id_to_token, int min_freq)
{
    const auto& reserved = reserved_tokens();
    if (id_to_token.size() < reserved.size() ||
        !std::equal(reserved.begin(), reserved.end(), id_to_token.begin())) {
        throw FormatError("vocabulary: reserved tokens missing or out of order");
    }
    Vocabulary vocab;
    vocab.min_freq_ = min_freq;
    for (std::size_t i = reserved.size(); i < id_to_token.size(); ++i) {
        if (vocab.token_to_id_.contains(id_to_token[i])) {
            throw FormatError("vocabulary: duplicate token '" + id_to_token[i] + "'");
        }
        vocab.add(std::move(id_to_token[i]));
    }
    return vocab;
}

TokenId Vocabulary::id(std::string_view token) const
{
    const auto it = token_to_id_.find(std::string(token));
    return it == token_to_id_.end() ? special::kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const
{
    return token_to_id_.contains(std::string(token));
}

const std::string& Vocabulary::token(TokenId id) const
{
    if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
        throw ValidationError("vocabulary: id " + std::to_string(id) + " out of range");
    }
    return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocabulary::tokenize(std::string_view text) const
{
    const auto tokens = normalize_tokens(text);
    if (tokens.empty()) throw ValidationError("tokenize: text is empty after normalization");
    std::vector<TokenId> ids;
    ids.reserve(tokens.size() + 2);
    ids.push_back(special::kStart);
    for (const auto& t : tokens) ids.push_back(id(t));
    ids.push_back(special::kEnd);
    return ids;
}

std::string Vocabulary::detokenize(std::span<const TokenId> ids) const
{
    std::vector<std::string> words;
    for (TokenId id : ids) {
        if (id == special::kStart || id == special::kEnd || id == special::kPad) continue;
        words.push_back(token(id));
    }
    return join(words);
}

}  // namespace observer::corpus
