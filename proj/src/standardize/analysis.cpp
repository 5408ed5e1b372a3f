#include "scitab/error.hpp"
#include "scitab/standardize/standardize.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace scitab::standardize {

std::vector<std::string> bin_numeric(const std::vector<std::optional<double>>& values) {
    std::vector<double> finite;
    for (const auto& v : values)
        if (v && std::isfinite(*v)) finite.push_back(*v);
    std::vector<std::string> out(values.size(), "empty");
    if (finite.empty()) return out;
    std::sort(finite.begin(), finite.end());
    const auto n = finite.size();
    const bool constant = finite.front() == finite.back();
    // Empirical quantile: smallest value whose cumulative share reaches p.
    const double q1 = finite[(n + 2) / 3 - 1];
    const double q2 = finite[(2 * n + 2) / 3 - 1];
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto& v = values[i];
        if (!v || !std::isfinite(*v)) continue;
        if (constant) out[i] = "medium";
        else if (*v <= q1) out[i] = "low";
        else if (*v <= q2) out[i] = "medium";
        else out[i] = "high";
    }
    return out;
}

std::optional<double> leading_number(std::string_view text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        bool starts = std::isdigit(static_cast<unsigned char>(c)) ||
                      ((c == '-' || c == '.') && i + 1 < text.size() &&
                       std::isdigit(static_cast<unsigned char>(text[i + 1])));
        if (!starts) continue;
        std::string buf(text.substr(i));
        char* end = nullptr;
        double v = std::strtod(buf.c_str(), &end);
        if (end != buf.c_str() && std::isfinite(v)) return v;
    }
    return std::nullopt;
}

std::vector<Point2> project_2d(const std::vector<std::vector<double>>& vectors) {
    if (vectors.empty()) throw UsageError("project_2d needs at least one vector");
    const auto n = vectors.size();
    const auto d = vectors.front().size();
    if (d == 0) throw UsageError("project_2d needs nonempty vectors");
    for (const auto& v : vectors)
        if (v.size() != d) throw UsageError("project_2d needs vectors of one dimension");
    std::vector<Point2> out(n);
    if (n == 1) return out;

    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vectors[i][j];
    x.rowwise() -= x.colwise().mean();

    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    Eigen::MatrixXd v = svd.matrixV();
    if (s.size() == 0 || s(0) <= 0.0) return out;

    const Eigen::Index axes = std::min<Eigen::Index>(2, s.size());
    for (Eigen::Index a = 0; a < axes; ++a) {
        if (a == 1 && s(1) <= 1e-12 * s(0)) break;
        Eigen::VectorXd axis = v.col(a);
        Eigen::Index arg = 0;
        for (Eigen::Index j = 1; j < axis.size(); ++j)
            if (std::abs(axis(j)) > std::abs(axis(arg))) arg = j;
        if (axis(arg) < 0) axis = -axis;
        Eigen::VectorXd coords = x * axis;
        for (std::size_t i = 0; i < n; ++i) {
            auto c = coords(static_cast<Eigen::Index>(i));
            if (a == 0) out[i].x = c;
            else out[i].y = c;
        }
    }
    return out;
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t weighted_pick(const std::vector<double>& mass, std::mt19937_64& rng) {
    double total = std::accumulate(mass.begin(), mass.end(), 0.0);
    double r = uniform01(rng) * total;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        if (mass[i] <= 0) continue;
        if (r < mass[i]) return i;
        r -= mass[i];
    }
    for (std::size_t i = mass.size(); i-- > 0;)
        if (mass[i] > 0) return i;
    return 0;
}

struct Run {
    std::vector<int> assign;
    std::vector<std::vector<double>> centroids;
    double inertia = std::numeric_limits<double>::infinity();
};

Run lloyd(const std::vector<std::vector<double>>& x, const std::vector<double>& w, int k, std::mt19937_64& rng,
          int max_iter) {
    const auto n = x.size();
    const auto d = x.front().size();
    Run run;
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    run.centroids.push_back(x[weighted_pick(w, rng)]);
    while (static_cast<int>(run.centroids.size()) < k) {
        std::vector<double> mass(n);
        for (std::size_t i = 0; i < n; ++i) {
            best[i] = std::min(best[i], sq_dist(x[i], run.centroids.back()));
            mass[i] = w[i] * best[i];
        }
        run.centroids.push_back(x[weighted_pick(mass, rng)]);
    }

    run.assign.assign(n, -1);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int arg = 0;
            double bd = sq_dist(x[i], run.centroids[0]);
            for (int c = 1; c < k; ++c) {
                double dd = sq_dist(x[i], run.centroids[static_cast<std::size_t>(c)]);
                if (dd < bd) {
                    bd = dd;
                    arg = c;
                }
            }
            if (run.assign[i] != arg) {
                run.assign[i] = arg;
                changed = true;
            }
        }
        std::vector<std::vector<double>> sums(static_cast<std::size_t>(k), std::vector<double>(d, 0.0));
        std::vector<double> mass(static_cast<std::size_t>(k), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto c = static_cast<std::size_t>(run.assign[i]);
            mass[c] += w[i];
            for (std::size_t j = 0; j < d; ++j) sums[c][j] += w[i] * x[i][j];
        }
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (mass[c] > 0) {
                for (std::size_t j = 0; j < d; ++j) sums[c][j] /= mass[c];
                run.centroids[c] = std::move(sums[c]);
                continue;
            }
            // Empty cluster: move it to the point farthest from its centroid.
            std::size_t far = 0;
            double fd = -1;
            for (std::size_t i = 0; i < n; ++i) {
                double dd = sq_dist(x[i], run.centroids[static_cast<std::size_t>(run.assign[i])]);
                if (dd > fd) {
                    fd = dd;
                    far = i;
                }
            }
            run.centroids[c] = x[far];
            run.assign[far] = static_cast<int>(c);
            changed = true;
        }
        if (!changed) break;
    }
    run.inertia = 0;
    for (std::size_t i = 0; i < n; ++i)
        run.inertia += w[i] * sq_dist(x[i], run.centroids[static_cast<std::size_t>(run.assign[i])]);
    return run;
}

ClusterResult finish(Run run) {
    // Renumber clusters by first appearance so ids do not depend on seeding order.
    std::map<int, int> remap;
    for (int a : run.assign)
        if (!remap.count(a)) remap.emplace(a, static_cast<int>(remap.size()));
    ClusterResult r;
    r.k = static_cast<int>(remap.size());
    r.centroids.resize(remap.size());
    for (auto [from, to] : remap) r.centroids[static_cast<std::size_t>(to)] = run.centroids[static_cast<std::size_t>(from)];
    for (int& a : run.assign) a = remap[a];
    r.assignments = std::move(run.assign);
    r.inertia = run.inertia;
    return r;
}

ClusterResult best_of(const std::vector<std::vector<double>>& x, const std::vector<double>& w, int k,
                      const ClusterOptions& o) {
    std::mt19937_64 rng(o.seed + static_cast<std::uint64_t>(k) * 0x9E3779B97F4A7C15ULL);
    Run best;
    for (int r = 0; r < std::max(1, o.restarts); ++r) {
        auto run = lloyd(x, w, k, rng, o.max_iterations);
        if (run.inertia < best.inertia) best = std::move(run);
    }
    return finish(std::move(best));
}

}  // namespace

double silhouette(const std::vector<std::vector<double>>& x, const std::vector<double>& w,
                  const std::vector<int>& assign) {
    const auto n = x.size();
    int k = 0;
    for (int a : assign) k = std::max(k, a + 1);
    if (k < 2) return 0.0;
    std::vector<double> size(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < n; ++i) size[static_cast<std::size_t>(assign[i])] += w[i];

    double total = 0, weight = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) sum[static_cast<std::size_t>(assign[j])] += w[j] * std::sqrt(sq_dist(x[i], x[j]));
        auto own = static_cast<std::size_t>(assign[i]);
        // Copies of point i sit at distance 0 and count toward its own cluster size.
        double own_n = size[own] - 1.0;
        double s = 0.0;
        if (own_n > 0) {
            double a = sum[own] / own_n;
            double b = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c)
                if (c != own && size[c] > 0) b = std::min(b, sum[c] / size[c]);
            double m = std::max(a, b);
            s = m > 0 ? (b - a) / m : 0.0;
        }
        total += w[i] * s;
        weight += w[i];
    }
    return weight > 0 ? total / weight : 0.0;
}

ClusterResult cluster(const std::vector<std::vector<double>>& x, const std::vector<double>& weights,
                      const ClusterOptions& o) {
    if (x.empty()) throw UsageError("cluster needs at least one point");
    const auto n = x.size();
    for (const auto& v : x)
        if (v.size() != x.front().size()) throw UsageError("cluster needs points of one dimension");
    std::vector<double> w = weights.empty() ? std::vector<double>(n, 1.0) : weights;
    if (w.size() != n) throw UsageError("one weight per point required");
    for (double v : w)
        if (!(v > 0)) throw UsageError("weights must be positive");

    std::set<std::vector<double>> distinct(x.begin(), x.end());
    const int n_distinct = static_cast<int>(distinct.size());
    const double total = std::accumulate(w.begin(), w.end(), 0.0);

    if (o.k) {
        if (*o.k <= 0) throw UsageError("k must be positive");
        if (static_cast<std::size_t>(*o.k) >= n) {
            ClusterResult r;
            r.k = static_cast<int>(n);
            r.centroids = x;
            r.assignments.resize(n);
            std::iota(r.assignments.begin(), r.assignments.end(), 0);
            if (n >= 2) r.silhouette = silhouette(x, w, r.assignments);
            return r;
        }
        auto r = best_of(x, w, std::min(*o.k, n_distinct), o);
        if (r.k >= 2) r.silhouette = silhouette(x, w, r.assignments);
        return r;
    }

    if (total < 3.0 || n_distinct < 2) return best_of(x, w, 1, o);
    const int k_max = std::min({kMaxAutoClusters, static_cast<int>(total) - 1, n_distinct});
    ClusterResult best;
    double best_s = -std::numeric_limits<double>::infinity();
    for (int k = 2; k <= k_max; ++k) {
        auto r = best_of(x, w, k, o);
        double s = silhouette(x, w, r.assignments);
        if (s > best_s + 1e-12) {
            best_s = s;
            best = std::move(r);
            best.silhouette = s;
        }
    }
    return best;
}

}  // namespace scitab::standardize
