#include "scitab/gateway/embedding.hpp"

#include "scitab/error.hpp"

#include <cmath>

namespace scitab::gateway {

EmbeddingVector EmbeddingVector::normalized(std::vector<double> values) {
    double sq = 0.0;
    for (double v : values) sq += v * v;
    double n = std::sqrt(sq);
    if (!(n > 0.0) || !std::isfinite(n)) throw UsageError("cannot normalize a zero or non-finite vector");
    for (double& v : values) v /= n;
    return EmbeddingVector(std::move(values));
}

double EmbeddingVector::dot(const EmbeddingVector& other) const {
    if (other.values_.size() != values_.size()) throw UsageError("embedding dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) s += values_[i] * other.values_[i];
    return s;
}

double EmbeddingVector::norm() const { return std::sqrt(dot(*this)); }

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    double na = a.norm();
    double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

}  // namespace scitab::gateway
