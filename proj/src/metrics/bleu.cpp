#include "observer/metrics/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#include "observer/error.hpp"

namespace observer::metrics {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const Tokens& tokens, std::size_t n)
{
    NgramCounts counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        ++counts[Tokens(tokens.begin() + static_cast<long>(i),
                        tokens.begin() + static_cast<long>(i + n))];
    }
    return counts;
}

void check_order(int n)
{
    if (n < 1 || n > kMaxBleuOrder) throw ValidationError("bleu: n must be in [1, 4]");
}

}  // namespace

void BleuStats::add(const Tokens& candidate, const std::vector<Tokens>& references)
{
    if (candidate.empty()) throw ValidationError("bleu: empty candidate");
    if (references.empty()) throw ValidationError("bleu: no references");
    for (const auto& r : references) {
        if (r.empty()) throw ValidationError("bleu: empty reference");
    }

    for (std::size_t n = 1; n <= kMaxBleuOrder; ++n) {
        const auto cand = count_ngrams(candidate, n);
        NgramCounts max_ref;
        for (const auto& ref : references) {
            for (const auto& [gram, c] : count_ngrams(ref, n)) {
                auto& slot = max_ref[gram];
                slot = std::max(slot, c);
            }
        }
        std::size_t clipped = 0;
        std::size_t total = 0;
        for (const auto& [gram, c] : cand) {
            total += c;
            if (const auto it = max_ref.find(gram); it != max_ref.end()) {
                clipped += std::min(c, it->second);
            }
        }
        matches[n - 1] += clipped;
        totals[n - 1] += total;
    }

    const auto c = static_cast<long>(candidate.size());
    std::size_t best = references.front().size();
    for (const auto& ref : references) {
        const auto r = static_cast<long>(ref.size());
        const auto b = static_cast<long>(best);
        if (std::labs(r - c) < std::labs(b - c) || (std::labs(r - c) == std::labs(b - c) && r < b)) {
            best = ref.size();
        }
    }
    candidate_length += candidate.size();
    reference_length += best;
}

double BleuStats::score(int n, const BleuOptions& options) const
{
    check_order(n);
    if (candidate_length == 0) return 0.0;
    double log_sum = 0.0;
    for (int m = 0; m < n; ++m) {
        double num = static_cast<double>(matches[m]);
        double den = static_cast<double>(totals[m]);
        if (options.smoothing && m > 0) {
            num += 1.0;
            den += 1.0;
        }
        if (num == 0.0 || den == 0.0) return 0.0;
        log_sum += std::log(num / den);
    }
    const double c = static_cast<double>(candidate_length);
    const double r = static_cast<double>(reference_length);
    const double brevity = c < r ? std::exp(1.0 - r / c) : 1.0;
    return brevity * std::exp(log_sum / n);
}

double bleu(const Tokens& candidate, const std::vector<Tokens>& references, int n,
            const BleuOptions& options)
{
    check_order(n);
    BleuStats stats;
    stats.add(candidate, references);
    return stats.score(n, options);
}

double corpus_bleu(std::span<const Tokens> candidates,
                   std::span<const std::vector<Tokens>> references, int n,
                   const BleuOptions& options)
{
    check_order(n);
    if (candidates.size() != references.size()) {
        throw ValidationError("corpus_bleu: candidate and reference counts differ");
    }
    if (candidates.empty()) throw ValidationError("corpus_bleu: empty corpus");
    BleuStats stats;
    for (std::size_t i = 0; i < candidates.size(); ++i) stats.add(candidates[i], references[i]);
    return stats.score(n, options);
}

}  // namespace observer::metrics
