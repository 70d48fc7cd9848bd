#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "observer/captioner/beam.hpp"

namespace observer::testing {

/// Tiny Markov "model": next-token log-probabilities depend on the step
/// index and the previous token only.
class ToyStepper {
public:
    struct State {
        std::size_t depth = 0;
    };

    /// table[depth][prev][next] holds raw scores; rows are log-softmaxed.
    explicit ToyStepper(std::vector<std::vector<std::vector<double>>> table) : table_(std::move(table))
    {
        for (auto& by_prev : table_) {
            for (auto& row : by_prev) {
                double mx = *std::max_element(row.begin(), row.end());
                double sum = 0.0;
                for (double v : row) sum += std::exp(v - mx);
                const double lse = mx + std::log(sum);
                for (double& v : row) v -= lse;
            }
        }
    }

    static ToyStepper random(std::size_t vocab, std::size_t depth, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> dist(0.0, 2.0);
        std::vector<std::vector<std::vector<double>>> t(
            depth, std::vector<std::vector<double>>(vocab, std::vector<double>(vocab)));
        for (auto& a : t) {
            for (auto& b : a) {
                for (auto& c : b) c = dist(rng);
            }
        }
        return ToyStepper(std::move(t));
    }

    State initial() const { return {}; }

    captioner::StepScores<State> advance(const State& s, corpus::TokenId input) const
    {
        const auto& row = table_[std::min(s.depth, table_.size() - 1)][static_cast<std::size_t>(input)];
        return {row, std::vector<float>{1.0f}, State{s.depth + 1}};
    }

    std::size_t vocab_size() const { return table_.front().size(); }

    double log_prob(std::size_t depth, corpus::TokenId prev, corpus::TokenId next) const
    {
        return table_[std::min(depth, table_.size() - 1)][static_cast<std::size_t>(prev)]
                     [static_cast<std::size_t>(next)];
    }

private:
    std::vector<std::vector<std::vector<double>>> table_;
};

struct OracleBest {
    std::vector<corpus::TokenId> tokens;
    double score = -1e300;
};

/// Enumerates every complete sequence of at most `max_steps` generated
/// tokens (END-terminated, or cut at max_steps) and returns the one with the
/// best length-normalized log-probability, lexicographically smallest on ties.
inline OracleBest exhaustive_best(const ToyStepper& toy, std::size_t max_steps)
{
    OracleBest best;
    std::vector<corpus::TokenId> seq;
    auto visit = [&](auto&& self, corpus::TokenId prev, double lp) -> void {
        for (std::size_t v = 0; v < toy.vocab_size(); ++v) {
            const auto id = static_cast<corpus::TokenId>(v);
            if (!captioner::emittable(id)) continue;
            seq.push_back(id);
            const double next = lp + toy.log_prob(seq.size() - 1, prev, id);
            if (id == corpus::special::kEnd || seq.size() == max_steps) {
                const double score = next / static_cast<double>(seq.size());
                if (score > best.score || (score == best.score && seq < best.tokens)) {
                    best.score = score;
                    best.tokens = seq;
                }
            } else {
                self(self, id, next);
            }
            seq.pop_back();
        }
    };
    visit(visit, corpus::special::kStart, 0.0);
    return best;
}

/// The fixed |V| = 5 toy used by the acceptance run: greedy takes the
/// locally best first word and ends up worse than the sequence beam search
/// keeps alive. Ids: 0-3 reserved, 4 = "w".
inline ToyStepper greedy_trap_toy()
{
    using std::log;
    const double ninf = -1e9;
    // depth 0 (after START): UNK 0.45, w 0.40, END 0.15
    // depth 1 after UNK: everything flat (poor continuation)
    // depth 1 after w: END 0.95
    std::vector<std::vector<std::vector<double>>> t(3, std::vector<std::vector<double>>(5, std::vector<double>(5, ninf)));
    auto set = [&](std::size_t d, std::size_t prev, std::vector<double> p) {
        for (std::size_t i = 0; i < 5; ++i) t[d][prev][i] = p[i] > 0 ? log(p[i]) : ninf;
    };
    set(0, 0, {0.0, 0.15, 0.0, 0.45, 0.40});
    for (std::size_t d = 1; d < 3; ++d) {
        set(d, 3, {0.0, 0.34, 0.0, 0.33, 0.33});
        set(d, 4, {0.0, 0.95, 0.0, 0.025, 0.025});
        set(d, 1, {0.0, 1.0, 0.0, 0.0, 0.0});
    }
    return ToyStepper(std::move(t));
}

}  // namespace observer::testing
