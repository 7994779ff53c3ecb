#include "drk/embedding.hpp"

#include "drk/errors.hpp"

#include <cmath>

namespace drk {

EmbeddingVector l2_normalize(EmbeddingVector v) {
    double sumsq = 0.0;
    for (const double x : v.values) {
        if (!std::isfinite(x))
            throw Error(Errc::empty_input, "embedding vector contains non-finite values");
        sumsq += x * x;
    }
    if (sumsq <= 0.0)
        throw Error(Errc::empty_input, "cannot normalize a zero embedding vector");
    const double inv = 1.0 / std::sqrt(sumsq);
    for (double& x : v.values)
        x *= inv;
    v.normalized = true;
    return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    const std::size_t n = a.size() < b.size() ? a.size() : b.size();
    for (std::size_t i = 0; i < n; ++i)
        s += a[i] * b[i];
    return s;
}

} // namespace drk
