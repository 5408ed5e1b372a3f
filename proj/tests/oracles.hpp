#pragma once

// Reference implementations used to check the library. They are written
// independently (no Eigen, no shared helpers) and favour clarity over speed.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace scitab::oracle {

using Matrix = std::vector<std::vector<double>>;

// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Returns eigenvalues
// (descending) and the matching eigenvectors as columns of `vectors`.
inline void jacobi_eigen(Matrix a, std::vector<double>& values, Matrix& vectors) {
    const std::size_t n = a.size();
    vectors.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) vectors[i][i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = vectors[k][p], vkq = vectors[k][q];
                    vectors[k][p] = c * vkp - s * vkq;
                    vectors[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a[i][i] > a[j][j]; });
    values.clear();
    Matrix sorted(n, std::vector<double>(n));
    for (std::size_t c = 0; c < n; ++c) {
        values.push_back(a[order[c]][order[c]]);
        for (std::size_t r = 0; r < n; ++r) sorted[r][c] = vectors[r][order[c]];
    }
    vectors = std::move(sorted);
}

// Scores of the centred rows on the top two covariance eigenvectors.
inline std::vector<std::pair<double, double>> pca_2d(const Matrix& rows) {
    const std::size_t n = rows.size(), d = rows.empty() ? 0 : rows[0].size();
    std::vector<double> mean(d, 0.0);
    for (const auto& r : rows)
        for (std::size_t j = 0; j < d; ++j) mean[j] += r[j] / static_cast<double>(n);
    Matrix x(n, std::vector<double>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) x[i][j] = rows[i][j] - mean[j];
    Matrix cov(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b) cov[a][b] += x[i][a] * x[i][b];
    std::vector<double> values;
    Matrix vecs;
    jacobi_eigen(cov, values, vecs);
    std::vector<std::pair<double, double>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s0 = 0, s1 = 0;
        for (std::size_t j = 0; j < d; ++j) {
            s0 += x[i][j] * vecs[j][0];
            if (d > 1) s1 += x[i][j] * vecs[j][1];
        }
        out[i] = {s0, s1};
    }
    return out;
}

// Largest per-coordinate deviation after choosing the better sign per axis.
template <typename Points>
double max_abs_deviation_up_to_sign(const Points& got, const std::vector<std::pair<double, double>>& want) {
    double best_x = 1e300, best_y = 1e300;
    for (double sx : {1.0, -1.0}) {
        double dx = 0;
        for (std::size_t i = 0; i < want.size(); ++i) dx = std::max(dx, std::abs(sx * got[i].x - want[i].first));
        best_x = std::min(best_x, dx);
    }
    for (double sy : {1.0, -1.0}) {
        double dy = 0;
        for (std::size_t i = 0; i < want.size(); ++i) dy = std::max(dy, std::abs(sy * got[i].y - want[i].second));
        best_y = std::min(best_y, dy);
    }
    return std::max(best_x, best_y);
}

struct Blobs {
    Matrix points;
    std::vector<int> labels;
};

// `k` isotropic Gaussian blobs with standard deviation `sigma` whose centres
// are pairwise at least `min_gap` apart.
inline Blobs make_blobs(std::mt19937_64& rng, int k, int per_blob, std::size_t dim, double sigma, double min_gap) {
    std::uniform_real_distribution<double> u(-3.0 * min_gap, 3.0 * min_gap);
    std::normal_distribution<double> noise(0.0, sigma);
    Matrix centres;
    while (static_cast<int>(centres.size()) < k) {
        std::vector<double> c(dim);
        for (auto& v : c) v = u(rng);
        bool ok = true;
        for (const auto& o : centres) {
            double d2 = 0;
            for (std::size_t j = 0; j < dim; ++j) d2 += (c[j] - o[j]) * (c[j] - o[j]);
            ok = ok && std::sqrt(d2) >= min_gap;
        }
        if (ok) centres.push_back(std::move(c));
    }
    Blobs b;
    for (int c = 0; c < k; ++c)
        for (int i = 0; i < per_blob; ++i) {
            std::vector<double> p(dim);
            for (std::size_t j = 0; j < dim; ++j) p[j] = centres[c][j] + noise(rng);
            b.points.push_back(std::move(p));
            b.labels.push_back(c);
        }
    return b;
}

// Fraction of points whose predicted cluster maps to their true label under
// the best one-to-one relabelling.
inline double permutation_accuracy(const std::vector<int>& truth, const std::vector<int>& predicted) {
    int kt = 0, kp = 0;
    for (int t : truth) kt = std::max(kt, t + 1);
    for (int p : predicted) kp = std::max(kp, p + 1);
    const int k = std::max(kt, kp);
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = 0;
    do {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) hits += perm[predicted[i]] == truth[i];
        best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(truth.size());
}

// Distinct over total after trimming and ASCII case folding.
inline double distinct_ratio(const std::vector<std::string>& values) {
    std::set<std::string> seen;
    for (auto v : values) {
        auto b = v.find_first_not_of(" \t\r\n");
        auto e = v.find_last_not_of(" \t\r\n");
        v = b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
        for (auto& ch : v) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        seen.insert(v);
    }
    return static_cast<double>(seen.size()) / static_cast<double>(values.size());
}

}  // namespace scitab::oracle
