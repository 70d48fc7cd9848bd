#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace observer::testing {

using Words = std::vector<std::string>;

/// Occurrences of `gram` in `seq`, by direct scanning.
inline std::size_t count_occurrences(const Words& seq, const Words& gram)
{
    std::size_t count = 0;
    for (std::size_t i = 0; i + gram.size() <= seq.size(); ++i) {
        bool same = true;
        for (std::size_t j = 0; j < gram.size() && same; ++j) same = seq[i + j] == gram[j];
        count += same ? 1 : 0;
    }
    return count;
}

/// Sentence BLEU-n by brute force: for every candidate position, count the
/// n-gram against the candidate and every reference, clip, and only count
/// each distinct n-gram once (at its first position).
inline double oracle_bleu(const Words& cand, const std::vector<Words>& refs, int n)
{
    double log_sum = 0.0;
    for (int m = 1; m <= n; ++m) {
        const std::size_t len = static_cast<std::size_t>(m);
        if (cand.size() < len) return 0.0;
        std::size_t matched = 0;
        const std::size_t total = cand.size() - len + 1;
        for (std::size_t i = 0; i < total; ++i) {
            const Words gram(cand.begin() + static_cast<long>(i), cand.begin() + static_cast<long>(i + len));
            bool first = true;
            for (std::size_t k = 0; k < i && first; ++k) {
                first = !std::equal(gram.begin(), gram.end(), cand.begin() + static_cast<long>(k));
            }
            if (!first) continue;
            std::size_t best_ref = 0;
            for (const auto& r : refs) best_ref = std::max(best_ref, count_occurrences(r, gram));
            matched += std::min(count_occurrences(cand, gram), best_ref);
        }
        if (matched == 0) return 0.0;
        log_sum += std::log(static_cast<double>(matched) / static_cast<double>(total));
    }
    std::size_t r = refs.front().size();
    for (const auto& ref : refs) {
        const auto d = std::abs(static_cast<long>(ref.size()) - static_cast<long>(cand.size()));
        const auto best = std::abs(static_cast<long>(r) - static_cast<long>(cand.size()));
        if (d < best || (d == best && ref.size() < r)) r = ref.size();
    }
    const double c = static_cast<double>(cand.size());
    const double bp = c < static_cast<double>(r) ? std::exp(1.0 - static_cast<double>(r) / c) : 1.0;
    return bp * std::exp(log_sum / n);
}

/// METEOR by enumerating every one-to-one exact-match alignment, keeping
/// the ones with the most matches and, among those, the fewest chunks.
inline double oracle_meteor(const Words& cand, const Words& ref)
{
    std::size_t best_matches = 0;
    std::size_t best_chunks = std::numeric_limits<std::size_t>::max();
    std::vector<int> link(cand.size(), -1);
    std::vector<bool> used(ref.size(), false);

    auto score_alignment = [&] {
        std::size_t matches = 0, chunks = 0;
        int prev_i = -2, prev_j = -2;
        for (std::size_t i = 0; i < cand.size(); ++i) {
            if (link[i] < 0) continue;
            ++matches;
            const bool continues = static_cast<int>(i) == prev_i + 1 && link[i] == prev_j + 1;
            if (!continues) ++chunks;
            prev_i = static_cast<int>(i);
            prev_j = link[i];
        }
        if (matches > best_matches || (matches == best_matches && chunks < best_chunks)) {
            best_matches = matches;
            best_chunks = chunks;
        }
    };
    auto visit = [&](auto&& self, std::size_t i) -> void {
        if (i == cand.size()) {
            score_alignment();
            return;
        }
        self(self, i + 1);
        for (std::size_t j = 0; j < ref.size(); ++j) {
            if (used[j] || ref[j] != cand[i]) continue;
            used[j] = true;
            link[i] = static_cast<int>(j);
            self(self, i + 1);
            link[i] = -1;
            used[j] = false;
        }
    };
    visit(visit, 0);
    if (best_matches == 0) return 0.0;
    const double p = static_cast<double>(best_matches) / static_cast<double>(cand.size());
    const double r = static_cast<double>(best_matches) / static_cast<double>(ref.size());
    const double f = p * r / (0.9 * p + 0.1 * r);
    const double frag = static_cast<double>(best_chunks) / static_cast<double>(best_matches);
    return f * (1.0 - 0.5 * frag * frag * frag);
}

inline Words random_words(std::mt19937& rng, std::size_t vocab, std::size_t max_len)
{
    std::uniform_int_distribution<std::size_t> len(1, max_len), tok(0, vocab - 1);
    Words w(len(rng));
    for (auto& t : w) t = "w" + std::to_string(tok(rng));
    return w;
}

}  // namespace observer::testing
