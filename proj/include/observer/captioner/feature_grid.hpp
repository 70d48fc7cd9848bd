#pragma once

#include <span>
#include <vector>

namespace observer::captioner {

/// L x D encoder output: one D-dimensional feature per spatial location,
/// locations in row-major order over the final feature map.
template <typename T>
struct FeatureGridT {
    std::size_t locations = 0;
    std::size_t dim = 0;
    std::vector<T> values;

    FeatureGridT() = default;
    FeatureGridT(std::size_t l, std::size_t d) : locations(l), dim(d), values(l * d) {}

    std::span<T> row(std::size_t l) { return {values.data() + l * dim, dim}; }
    std::span<const T> row(std::size_t l) const { return {values.data() + l * dim, dim}; }

    bool operator==(const FeatureGridT&) const = default;
};

using FeatureGrid = FeatureGridT<float>;

}  // namespace observer::captioner
