#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace observer::metrics {

using Tokens = std::vector<std::string>;

inline constexpr int kMaxBleuOrder = 4;

struct BleuOptions {
    /// Add-one smoothing of the n >= 2 precisions. Off by default: an
    /// n-gram order without any match scores exactly 0.
    bool smoothing = false;
};

/// Clipped n-gram counts and lengths, summable across a corpus.
struct BleuStats {
    std::array<std::size_t, kMaxBleuOrder> matches{};
    std::array<std::size_t, kMaxBleuOrder> totals{};
    std::size_t candidate_length = 0;
    std::size_t reference_length = 0;  // closest reference length, shorter on ties

    /// Throws ValidationError on an empty candidate, an empty reference
    /// list, or an empty reference.
    void add(const Tokens& candidate, const std::vector<Tokens>& references);

    /// Geometric mean of precisions 1..n times the brevity penalty.
    double score(int n, const BleuOptions& options = {}) const;
};

/// Sentence-level BLEU-n, n in [1, 4].
double bleu(const Tokens& candidate, const std::vector<Tokens>& references, int n,
            const BleuOptions& options = {});

/// Corpus BLEU-n from n-gram statistics pooled over all items (not the mean
/// of sentence scores).
double corpus_bleu(std::span<const Tokens> candidates,
                   std::span<const std::vector<Tokens>> references, int n,
                   const BleuOptions& options = {});

}  // namespace observer::metrics
