#include "observer/metrics/meteor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "observer/error.hpp"

namespace observer::metrics {

namespace {

constexpr std::size_t kMaxTokens = 64;

// Search state: next candidate position, reference index matched by the
// previous candidate token (or none), and the set of used reference slots.
class AlignmentSearch {
public:
    AlignmentSearch(const Tokens& candidate, const Tokens& reference)
        : cand_(candidate), ref_(reference)
    {
    }

    // Returns (matches, continuations) maximized lexicographically.
    std::pair<std::size_t, std::size_t> best(std::size_t i, int prev, std::uint64_t used)
    {
        if (i == cand_.size()) return {0, 0};
        const Key key{i, prev, used};
        if (const auto it = memo_.find(key); it != memo_.end()) return it->second;

        auto result = best(i + 1, -1, used);
        for (std::size_t j = 0; j < ref_.size(); ++j) {
            if ((used >> j) & 1u || ref_[j] != cand_[i]) continue;
            auto sub = best(i + 1, static_cast<int>(j), used | (std::uint64_t{1} << j));
            sub.first += 1;
            if (prev >= 0 && static_cast<std::size_t>(prev) + 1 == j) sub.second += 1;
            result = std::max(result, sub);
        }
        memo_.emplace(key, result);
        return result;
    }

private:
    struct Key {
        std::size_t i;
        int prev;
        std::uint64_t used;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const
        {
            std::uint64_t h = k.used * 0x9e3779b97f4a7c15ULL;
            h ^= (static_cast<std::uint64_t>(k.i) << 8) ^ static_cast<std::uint64_t>(k.prev + 1);
            return static_cast<std::size_t>(h ^ (h >> 29));
        }
    };

    const Tokens& cand_;
    const Tokens& ref_;
    std::unordered_map<Key, std::pair<std::size_t, std::size_t>, KeyHash> memo_;
};

}  // namespace

Alignment align(const Tokens& candidate, const Tokens& reference)
{
    if (candidate.size() > kMaxTokens || reference.size() > kMaxTokens) {
        throw ValidationError("meteor: sequences longer than 64 tokens are not supported");
    }
    AlignmentSearch search(candidate, reference);
    const auto [matches, continuations] = search.best(0, -1, 0);
    return {matches, matches - continuations};
}

double meteor(const Tokens& candidate, const Tokens& reference, const MeteorParams& params)
{
    if (candidate.empty() || reference.empty()) throw ValidationError("meteor: empty input");
    const Alignment a = align(candidate, reference);
    if (a.matches == 0) return 0.0;
    const double m = static_cast<double>(a.matches);
    const double precision = m / static_cast<double>(candidate.size());
    const double recall = m / static_cast<double>(reference.size());
    const double fmean =
        precision * recall / (params.alpha * precision + (1.0 - params.alpha) * recall);
    const double penalty =
        params.gamma * std::pow(static_cast<double>(a.chunks) / m, params.beta);
    return fmean * (1.0 - penalty);
}

double meteor(const Tokens& candidate, const std::vector<Tokens>& references,
              const MeteorParams& params)
{
    if (references.empty()) throw ValidationError("meteor: no references");
    double best = 0.0;
    for (const auto& ref : references) best = std::max(best, meteor(candidate, ref, params));
    return best;
}

}  // namespace observer::metrics
