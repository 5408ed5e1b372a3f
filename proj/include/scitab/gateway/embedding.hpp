#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace scitab::gateway {

// Dense embedding. Vectors produced by the gateway are unit-norm.
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {}

    // Scales to unit Euclidean norm. Throws UsageError for a zero or non-finite vector.
    static EmbeddingVector normalized(std::vector<double> values);

    std::size_t dimension() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    double dot(const EmbeddingVector& other) const;
    double norm() const;

    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

private:
    std::vector<double> values_;
};

// Cosine similarity; 0 when either vector is zero.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace scitab::gateway
