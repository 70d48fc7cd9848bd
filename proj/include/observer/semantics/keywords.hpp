#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "observer/semantics/encoder.hpp"

namespace observer::semantics {

/// Default number of keywords requested from a generated caption.
inline constexpr int kDefaultKeywordCount = 2;

/// Version tag of the shipped English stopword list.
std::string_view stopword_list_version();
bool is_stopword(std::string_view token);

/// Content tokens of `caption` (normalized, stopwords removed, first
/// occurrence kept), in caption order.
std::vector<std::string> keyword_candidates(std::string_view caption);

/// Ranks candidates by cosine(embed(token), embed(caption)), ties by caption
/// position, and returns the top `count`. When every candidate fits, they
/// come back in caption order. A caption with no content tokens falls back
/// to its first `count` raw tokens.
std::vector<std::string> extract_keywords(const SentenceEncoder& encoder,
                                          std::string_view caption,
                                          int count = kDefaultKeywordCount);

}  // namespace observer::semantics
