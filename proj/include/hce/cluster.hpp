#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hce/random.hpp"
#include "hce/types.hpp"

namespace hce {

/// Dense row-major point set.
class PointMatrix {
public:
    PointMatrix() = default;
    explicit PointMatrix(std::size_t dim) : dim_(dim) {}

    void add(std::span<const double> p) {
        if (p.size() != dim_) throw Error("point has wrong dimension");
        data_.insert(data_.end(), p.begin(), p.end());
    }

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
    std::span<const double> operator[](std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    std::span<double> operator[](std::size_t i) { return {data_.data() + i * dim_, dim_}; }

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

enum class Metric { Euclidean, Cosine };
enum class Linkage { Ward, Complete, Average };

inline std::string to_string(Metric m) { return m == Metric::Euclidean ? "euclidean" : "cosine"; }
inline std::string to_string(Linkage l) {
    switch (l) {
        case Linkage::Ward: return "ward";
        case Linkage::Complete: return "complete";
        case Linkage::Average: return "average";
    }
    return "?";
}

struct ClusteringSolution {
    std::vector<std::size_t> assignment;
    std::size_t k = 0;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double norm(std::span<const double> a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
}

/// Cosine similarity; 0 when either vector is zero.
inline double cosine(std::span<const double> a, std::span<const double> b) {
    double na = norm(a), nb = norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] * b[i];
    return std::clamp(d / (na * nb), -1.0, 1.0);
}

inline PointMatrix unit_normalized(const PointMatrix& pts) {
    PointMatrix out(pts.dim());
    std::vector<double> row(pts.dim());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        auto p = pts[i];
        double n = norm(p);
        for (std::size_t j = 0; j < p.size(); ++j) row[j] = n > 0 ? p[j] / n : 0.0;
        out.add(row);
    }
    return out;
}

/// Renumbers cluster ids in order of first appearance.
inline ClusteringSolution canonical_labels(std::span<const std::size_t> raw) {
    ClusteringSolution s;
    std::vector<std::size_t> remap;
    std::vector<std::size_t> seen_raw;
    s.assignment.reserve(raw.size());
    for (auto r : raw) {
        auto it = std::find(seen_raw.begin(), seen_raw.end(), r);
        if (it == seen_raw.end()) {
            seen_raw.push_back(r);
            s.assignment.push_back(seen_raw.size() - 1);
        } else {
            s.assignment.push_back(static_cast<std::size_t>(it - seen_raw.begin()));
        }
    }
    s.k = seen_raw.size();
    return s;
}

// ---------------------------------------------------------------------------
// k-means
// ---------------------------------------------------------------------------

struct KMeansOptions {
    std::size_t k = 2;
    Metric metric = Metric::Euclidean;
    std::size_t restarts = 10;
    std::size_t max_iters = 300;
    std::uint64_t seed = 1;
};

struct KMeansResult {
    ClusteringSolution solution;
    /// Within-cluster sum of squared distances of the best restart.
    double objective = 0.0;
    /// Objective after every iteration of the best restart.
    std::vector<double> history;
};

namespace detail {

inline std::vector<std::size_t> kmeans_pp_seeds(const PointMatrix& pts, std::size_t k, Rng& rng) {
    const std::size_t n = pts.size();
    std::vector<std::size_t> seeds{static_cast<std::size_t>(rng.below(n))};
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::vector<char> chosen(n, 0);
    chosen[seeds[0]] = 1;
    while (seeds.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_distance(pts[i], pts[seeds.back()]));
            if (!chosen[i]) total += d2[i];
        }
        std::size_t pick = n;
        if (total > 0.0) {
            double u = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (chosen[i]) continue;
                acc += d2[i];
                if (d2[i] > 0.0 && u < acc) {
                    pick = i;
                    break;
                }
            }
            if (pick == n)  // rounding at the tail
                for (std::size_t i = n; i-- > 0;)
                    if (!chosen[i] && d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
        } else {
            for (std::size_t i = 0; i < n && pick == n; ++i)
                if (!chosen[i]) pick = i;
        }
        chosen[pick] = 1;
        seeds.push_back(pick);
    }
    return seeds;
}

struct LloydRun {
    std::vector<std::size_t> assignment;
    double objective = 0.0;
    std::vector<double> history;
};

inline LloydRun lloyd(const PointMatrix& pts, std::size_t k, std::size_t max_iters, Rng& rng) {
    const std::size_t n = pts.size(), d = pts.dim();
    PointMatrix centers(d);
    for (auto s : kmeans_pp_seeds(pts, k, rng)) centers.add(pts[s]);

    LloydRun run;
    run.assignment.assign(n, k);
    std::vector<std::size_t> sizes(k);
    std::vector<double> dist(n);
    for (std::size_t iter = 0; iter < std::max<std::size_t>(max_iters, 1); ++iter) {
        bool changed = false;
        std::fill(sizes.begin(), sizes.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double bd = squared_distance(pts[i], centers[0]);
            for (std::size_t c = 1; c < k; ++c) {
                double dc = squared_distance(pts[i], centers[c]);
                if (dc < bd) {
                    bd = dc;
                    best = c;
                }
            }
            if (run.assignment[i] != best) changed = true;
            run.assignment[i] = best;
            dist[i] = bd;
            ++sizes[best];
        }
        // Refill empty clusters with the point farthest from its centre,
        // taken from a cluster that can spare it.
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] != 0) continue;
            std::size_t far = n;
            for (std::size_t i = 0; i < n; ++i)
                if (sizes[run.assignment[i]] > 1 && (far == n || dist[i] > dist[far])) far = i;
            --sizes[run.assignment[far]];
            run.assignment[far] = c;
            ++sizes[c];
            dist[far] = 0.0;
            auto dst = centers[c];
            auto src = pts[far];
            std::copy(src.begin(), src.end(), dst.begin());
            changed = true;
        }
        for (std::size_t c = 0; c < k; ++c) std::fill(centers[c].begin(), centers[c].end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto dst = centers[run.assignment[i]];
            auto src = pts[i];
            for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
        }
        for (std::size_t c = 0; c < k; ++c)
            for (auto& x : centers[c]) x /= static_cast<double>(sizes[c]);
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i) obj += squared_distance(pts[i], centers[run.assignment[i]]);
        run.history.push_back(obj);
        run.objective = obj;
        if (!changed) break;
    }
    return run;
}

}  // namespace detail

/// Lloyd's k-means with k-means++ seeding, best of `restarts` by
/// within-cluster sum of squared distances. The cosine metric clusters
/// unit-normalised copies of the points.
inline KMeansResult kmeans(const PointMatrix& points, const KMeansOptions& opt) {
    if (opt.k == 0) throw Error("kmeans: k must be at least 1");
    if (opt.k > points.size()) throw Error("kmeans: k exceeds the number of points");
    const PointMatrix normalized = opt.metric == Metric::Cosine ? unit_normalized(points) : PointMatrix{};
    const PointMatrix& pts = opt.metric == Metric::Cosine ? normalized : points;

    KMeansResult best;
    bool have = false;
    for (std::size_t r = 0; r < std::max<std::size_t>(opt.restarts, 1); ++r) {
        Rng rng(opt.seed, r);
        auto run = detail::lloyd(pts, opt.k, opt.max_iters, rng);
        if (!have || run.objective < best.objective) {
            best.solution.assignment = std::move(run.assignment);
            best.solution.k = opt.k;
            best.objective = run.objective;
            best.history = std::move(run.history);
            have = true;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Agglomerative
// ---------------------------------------------------------------------------

/// Bottom-up merging with Lance-Williams distance updates until k clusters
/// remain. The closest pair is merged first; ties go to the smallest
/// (i, j) pair, where a cluster's index is its smallest member index.
inline ClusteringSolution agglomerative(const PointMatrix& points, std::size_t k, Metric metric, Linkage linkage) {
    const std::size_t n = points.size();
    if (k == 0) throw Error("agglomerative: k must be at least 1");
    if (k > n) throw Error("agglomerative: k exceeds the number of points");
    if (linkage == Linkage::Ward && metric != Metric::Euclidean)
        throw Error("agglomerative: ward linkage requires the euclidean metric");

    std::vector<double> dist(n * n, 0.0);
    auto at = [&](std::size_t i, std::size_t j) -> double& { return dist[i * n + j]; };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double d = metric == Metric::Euclidean ? std::sqrt(squared_distance(points[i], points[j]))
                                                   : 1.0 - cosine(points[i], points[j]);
            at(i, j) = at(j, i) = d;
        }

    std::vector<std::size_t> parent(n), size(n, 1);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    std::vector<std::size_t> active(n);
    std::iota(active.begin(), active.end(), std::size_t{0});

    while (active.size() > k) {
        std::size_t bi = 0, bj = 1;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < active.size(); ++a)
            for (std::size_t b = a + 1; b < active.size(); ++b) {
                double d = at(active[a], active[b]);
                if (d < bd) {
                    bd = d;
                    bi = a;
                    bj = b;
                }
            }
        const std::size_t i = active[bi], j = active[bj];
        const double ni = static_cast<double>(size[i]), nj = static_cast<double>(size[j]);
        for (auto m : active) {
            if (m == i || m == j) continue;
            double dim = at(i, m), djm = at(j, m), nd = 0.0;
            switch (linkage) {
                case Linkage::Complete: nd = std::max(dim, djm); break;
                case Linkage::Average: nd = (ni * dim + nj * djm) / (ni + nj); break;
                case Linkage::Ward: {
                    double nm = static_cast<double>(size[m]);
                    double v = ((ni + nm) * dim * dim + (nj + nm) * djm * djm - nm * bd * bd) / (ni + nj + nm);
                    nd = std::sqrt(std::max(0.0, v));
                    break;
                }
            }
            at(i, m) = at(m, i) = nd;
        }
        size[i] += size[j];
        parent[j] = i;
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    }

    std::vector<std::size_t> raw(n);
    for (std::size_t p = 0; p < n; ++p) {
        std::size_t r = p;
        while (parent[r] != r) r = parent[r];
        raw[p] = r;
    }
    return canonical_labels(raw);
}

}  // namespace hce
