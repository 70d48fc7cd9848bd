#pragma once

#include <vector>

#include "observer/metrics/bleu.hpp"

namespace observer::metrics {

struct MeteorParams {
    double alpha = 0.9;  // precision/recall balance of the harmonic mean
    double beta = 3.0;   // fragmentation exponent
    double gamma = 0.5;  // maximum fragmentation penalty
};

struct Alignment {
    std::size_t matches = 0;
    std::size_t chunks = 0;
};

/// Exact-match unigram alignment with the most matches and, among those,
/// the fewest chunks (runs contiguous in both sequences). Exhaustive search
/// with memoization; sequences are limited to 64 tokens.
Alignment align(const Tokens& candidate, const Tokens& reference);

/// METEOR against one reference: F-mean of unigram precision and recall
/// times (1 - gamma * (chunks / matches)^beta). Zero when nothing matches.
double meteor(const Tokens& candidate, const Tokens& reference, const MeteorParams& params = {});

/// Maximum over references. Throws ValidationError on empty input.
double meteor(const Tokens& candidate, const std::vector<Tokens>& references,
              const MeteorParams& params = {});

}  // namespace observer::metrics
