#include <algorithm>
#include <iterator>
#include <string_view>

#include "observer/semantics/keywords.hpp"

namespace observer::semantics {

namespace {

// English function words. Bump the version when the list changes.
constexpr std::string_view kVersion = "en-1";
constexpr std::string_view kStopwords[] = {
    "a",       "about",  "above",   "after",  "again",   "against", "all",    "am",
    "an",      "and",    "any",     "are",    "as",      "at",      "be",     "because",
    "been",    "before", "being",   "below",  "between", "both",    "but",    "by",
    "can",     "could",  "did",     "do",     "does",    "doing",   "down",   "during",
    "each",    "few",    "for",     "from",   "further", "had",     "has",    "have",
    "having",  "he",     "her",     "here",   "hers",    "herself", "him",    "himself",
    "his",     "how",    "i",       "if",     "in",      "into",    "is",     "it",
    "its",     "itself", "just",    "me",     "more",    "most",    "my",     "myself",
    "no",      "nor",    "not",     "now",    "of",      "off",     "on",     "once",
    "only",    "or",     "other",   "our",    "ours",    "out",     "over",   "own",
    "s",       "same",   "she",     "should", "so",      "some",    "such",   "t",
    "than",    "that",   "the",     "their",  "theirs",  "them",    "then",   "there",
    "these",   "they",   "this",    "those",  "through", "to",      "too",    "under",
    "until",   "up",     "very",    "was",    "we",      "were",    "what",   "when",
    "where",   "which",  "while",   "who",    "whom",    "why",     "will",   "with",
    "would",   "you",    "your",    "yours",  "yourself", "yourselves",
};

}  // namespace

std::string_view stopword_list_version()
{
    return kVersion;
}

bool is_stopword(std::string_view token)
{
    return std::find(std::begin(kStopwords), std::end(kStopwords), token) != std::end(kStopwords);
}

}  // namespace observer::semantics
