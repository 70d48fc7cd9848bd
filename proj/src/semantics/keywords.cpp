#include "observer/semantics/keywords.hpp"

#include <algorithm>
#include <unordered_set>

#include "observer/corpus/text.hpp"
#include "observer/error.hpp"

namespace observer::semantics {

std::vector<std::string> keyword_candidates(std::string_view caption)
{
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (auto& token : corpus::normalize_tokens(caption)) {
        if (is_stopword(token) || !seen.insert(token).second) continue;
        out.push_back(std::move(token));
    }
    return out;
}

std::vector<std::string> extract_keywords(const SentenceEncoder& encoder,
                                          std::string_view caption, int count)
{
    if (count < 1) throw ValidationError("extract_keywords: keyword count must be >= 1");
    const auto limit = static_cast<std::size_t>(count);
    const auto tokens = corpus::normalize_tokens(caption);
    if (tokens.empty()) throw ValidationError("extract_keywords: caption is empty");

    auto candidates = keyword_candidates(caption);
    if (candidates.empty()) {
        return {tokens.begin(), tokens.begin() + static_cast<long>(std::min(limit, tokens.size()))};
    }
    if (candidates.size() <= limit) return candidates;

    const auto sentence = encoder.embed(caption);
    struct Ranked {
        std::size_t position;
        double similarity;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        ranked.push_back({i, cosine_similarity(encoder.embed(candidates[i]), sentence)});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        return a.similarity > b.similarity;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < limit; ++i) out.push_back(candidates[ranked[i].position]);
    return out;
}

}  // namespace observer::semantics
