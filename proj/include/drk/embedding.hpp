#pragma once

#include <cstddef>
#include <vector>

namespace drk {

struct EmbeddingVector {
    std::vector<double> values;
    bool normalized = false;

    std::size_t dim() const { return values.size(); }
};

// Throws Error(Errc::empty_input) on a zero vector or non-finite values.
EmbeddingVector l2_normalize(EmbeddingVector v);

double dot(const std::vector<double>& a, const std::vector<double>& b);

} // namespace drk
