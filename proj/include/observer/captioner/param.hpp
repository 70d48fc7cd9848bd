#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace observer::captioner {

/// A named trainable array with its gradient accumulator.
template <typename T>
struct Param {
    std::string name;
    std::vector<T> value;
    std::vector<T> grad;

    Param() = default;
    Param(std::string n, std::size_t size) : name(std::move(n)), value(size), grad(size) {}

    std::size_t size() const { return value.size(); }
    void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }

    void init_normal(std::mt19937_64& rng, double stddev)
    {
        std::normal_distribution<double> dist(0.0, stddev);
        for (auto& v : value) v = static_cast<T>(dist(rng));
    }

    void init_uniform(std::mt19937_64& rng, double bound)
    {
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (auto& v : value) v = static_cast<T>(dist(rng));
    }
};

template <typename T>
bool all_finite(const std::vector<T>& values)
{
    for (const T v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace observer::captioner
