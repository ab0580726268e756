#include "qclust/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <tuple>

#include "qclust/errors.hpp"
#include "qclust/seeding.hpp"

namespace qclust::cluster {

namespace {

struct Compacted {
    std::vector<std::size_t> index;  // per sample, in [0, k)
    std::size_t k = 0;
};

Compacted compact(const Matrix& features, const std::vector<int>& labels) {
    if (labels.size() != features.rows()) {
        throw ArgumentError("got " + std::to_string(labels.size()) + " labels for " +
                            std::to_string(features.rows()) + " samples");
    }
    int max_label = -1;
    for (int l : labels) {
        if (l < 0) throw ArgumentError("cluster labels must be non-negative");
        max_label = std::max(max_label, l);
    }
    std::vector<long> remap(static_cast<std::size_t>(max_label + 1), -1);
    Compacted c;
    c.index.reserve(labels.size());
    // distinct labels numbered in ascending label order
    for (int l : labels) remap[static_cast<std::size_t>(l)] = 0;
    for (auto& r : remap) {
        if (r == 0) r = static_cast<long>(c.k++);
    }
    for (int l : labels) c.index.push_back(static_cast<std::size_t>(remap[static_cast<std::size_t>(l)]));
    return c;
}

std::vector<int> as_labels(const std::vector<std::size_t>& index) {
    return {index.begin(), index.end()};
}

Matrix centroids_compact(const Matrix& x, const Compacted& c, std::vector<std::size_t>* sizes = nullptr) {
    Matrix centroids(c.k, x.cols());
    std::vector<std::size_t> counts(c.k, 0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto dst = centroids.row(c.index[i]);
        const auto src = x.row(i);
        for (std::size_t d = 0; d < x.cols(); ++d) dst[d] += src[d];
        ++counts[c.index[i]];
    }
    for (std::size_t j = 0; j < c.k; ++j) {
        if (counts[j] == 0) continue;
        for (double& v : centroids.row(j)) v /= static_cast<double>(counts[j]);
    }
    if (sizes) *sizes = std::move(counts);
    return centroids;
}

Matrix kmeanspp_seeds(const Matrix& x, std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = x.rows();
    Matrix centers(k, x.cols());
    std::vector<double> mindist(n, std::numeric_limits<double>::infinity());

    std::size_t chosen = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    for (std::size_t c = 0; c < k; ++c) {
        if (c > 0) {
            double total = 0.0;
            for (double d : mindist) total += d;
            if (total > 0.0) {
                double target = std::uniform_real_distribution<double>(0.0, total)(rng);
                chosen = n - 1;
                for (std::size_t i = 0; i < n; ++i) {
                    target -= mindist[i];
                    if (target < 0.0 && mindist[i] > 0.0) {
                        chosen = i;
                        break;
                    }
                }
            } else {
                chosen = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
            }
        }
        std::copy(x.row(chosen).begin(), x.row(chosen).end(), centers.row(c).begin());
        for (std::size_t i = 0; i < n; ++i) {
            mindist[i] = std::min(mindist[i], squared_distance(x.row(i), centers.row(c)));
        }
    }
    return centers;
}

ClusterResult lloyd(const Matrix& x, std::size_t k, const KMeansOptions& opt, std::uint64_t seed) {
    const std::size_t n = x.rows();
    std::mt19937_64 rng(seed);
    Matrix centroids = kmeanspp_seeds(x, k, rng);

    Compacted assign{std::vector<std::size_t>(n, 0), k};
    std::vector<double> dist(n);
    std::vector<std::size_t> counts(k);
    ClusterResult res;

    for (std::size_t iter = 1; iter <= std::max<std::size_t>(opt.max_iters, 1); ++iter) {
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < k; ++j) {
                const double d = squared_distance(x.row(i), centroids.row(j));
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            assign.index[i] = best;
            dist[i] = best_d;
            ++counts[best];
        }

        // an empty cluster takes the point farthest from its centroid, drawn
        // from clusters that can spare one
        for (std::size_t e = 0; e < k; ++e) {
            if (counts[e] != 0) continue;
            std::size_t pick = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[assign.index[i]] > 1 && (pick == n || dist[i] > dist[pick])) pick = i;
            }
            --counts[assign.index[pick]];
            assign.index[pick] = e;
            dist[pick] = 0.0;
            ++counts[e];
        }

        Matrix updated = centroids_compact(x, assign);
        double shift = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            shift = std::max(shift, std::sqrt(squared_distance(updated.row(j), centroids.row(j))));
        }
        centroids = std::move(updated);
        res.wcss_trace.push_back(wcss(x, as_labels(assign.index), centroids));
        res.iterations = iter;
        if (shift < opt.tol) break;
    }

    res.labels = as_labels(assign.index);
    res.centroids = std::move(centroids);
    res.wcss = res.wcss_trace.back();
    return res;
}

}  // namespace

double wcss(const Matrix& features, const std::vector<int>& labels, const Matrix& centroids) {
    double total = 0.0;
    for (std::size_t i = 0; i < features.rows(); ++i) {
        total += squared_distance(features.row(i), centroids.row(static_cast<std::size_t>(labels[i])));
    }
    return total;
}

Matrix centroids_of(const Matrix& features, const std::vector<int>& labels, std::size_t k) {
    Compacted c{{}, k};
    c.index.reserve(labels.size());
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= k) throw ArgumentError("label out of range");
        c.index.push_back(static_cast<std::size_t>(l));
    }
    return centroids_compact(features, c);
}

ClusterResult kmeans(const Matrix& features, std::size_t k, const KMeansOptions& options) {
    if (k < 2) throw ArgumentError("k-means needs k >= 2");
    if (k > features.rows()) {
        throw ArgumentError("k = " + std::to_string(k) + " exceeds the " + std::to_string(features.rows()) +
                            " available samples");
    }
    if (!features.all_finite()) throw ArgumentError("k-means input contains non-finite values");

    ClusterResult best;
    bool have = false;
    const std::size_t restarts = std::max<std::size_t>(options.restarts, 1);
    for (std::size_t r = 0; r < restarts; ++r) {
        ClusterResult res = lloyd(features, k, options, derive_seed(options.seed, {r}));
        res.restart = r;
        // strict '<' keeps the lowest restart index among equal WCSS
        if (!have || res.wcss < best.wcss) {
            best = std::move(res);
            have = true;
        }
    }
    return best;
}

double silhouette(const Matrix& features, const std::vector<int>& labels) {
    const Compacted c = compact(features, labels);
    if (c.k < 2) throw ArgumentError("silhouette needs at least 2 clusters");
    const std::size_t n = features.rows();

    std::vector<std::size_t> sizes(c.k, 0);
    for (std::size_t l : c.index) ++sizes[l];

    std::vector<double> sums(c.k);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t own = c.index[i];
        if (sizes[own] == 1) continue;  // singleton scores 0
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sums[c.index[j]] += std::sqrt(squared_distance(features.row(i), features.row(j)));
        }
        const double a = sums[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < c.k; ++l) {
            if (l != own) b = std::min(b, sums[l] / static_cast<double>(sizes[l]));
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

MetricValue davies_bouldin(const Matrix& features, const std::vector<int>& labels) {
    const Compacted c = compact(features, labels);
    if (c.k < 2) throw ArgumentError("Davies-Bouldin needs at least 2 clusters");
    std::vector<std::size_t> sizes;
    const Matrix centroids = centroids_compact(features, c, &sizes);

    std::vector<double> scatter(c.k, 0.0);
    for (std::size_t i = 0; i < features.rows(); ++i) {
        scatter[c.index[i]] += std::sqrt(squared_distance(features.row(i), centroids.row(c.index[i])));
    }
    for (std::size_t l = 0; l < c.k; ++l) scatter[l] /= static_cast<double>(sizes[l]);

    MetricValue out;
    double total = 0.0;
    for (std::size_t i = 0; i < c.k; ++i) {
        double worst = 0.0;
        for (std::size_t j = 0; j < c.k; ++j) {
            if (j == i) continue;
            const double sep = std::sqrt(squared_distance(centroids.row(i), centroids.row(j)));
            double ratio;
            if (sep < kDegenerateEpsilon) {
                out.degenerate = true;
                ratio = scatter[i] + scatter[j] == 0.0 ? 0.0 : kSentinel;
            } else {
                ratio = (scatter[i] + scatter[j]) / sep;
            }
            worst = std::max(worst, ratio);
        }
        total += worst;
    }
    out.value = total / static_cast<double>(c.k);
    return out;
}

MetricValue calinski_harabasz(const Matrix& features, const std::vector<int>& labels) {
    const Compacted c = compact(features, labels);
    const std::size_t n = features.rows();
    if (c.k < 2) throw ArgumentError("Calinski-Harabasz needs at least 2 clusters");
    if (n <= c.k) throw ArgumentError("Calinski-Harabasz needs more samples than clusters");

    std::vector<std::size_t> sizes;
    const Matrix centroids = centroids_compact(features, c, &sizes);
    std::vector<double> mean(features.cols(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < features.cols(); ++d) mean[d] += features(i, d);
    }
    for (double& m : mean) m /= static_cast<double>(n);

    double between = 0.0;
    for (std::size_t l = 0; l < c.k; ++l) {
        between += static_cast<double>(sizes[l]) * squared_distance(centroids.row(l), mean);
    }
    double within = 0.0;
    for (std::size_t i = 0; i < n; ++i) within += squared_distance(features.row(i), centroids.row(c.index[i]));

    if (within < kDegenerateEpsilon) return {kSentinel, true};
    const double k = static_cast<double>(c.k);
    return {(between / (k - 1.0)) / (within / (static_cast<double>(n) - k)), false};
}

bool collapsed_regime(double davies_bouldin, double calinski_harabasz) {
    return calinski_harabasz > kCollapsedCalinski || davies_bouldin < kCollapsedDavies;
}

Scores score(const Matrix& features, const std::vector<int>& labels) {
    Scores s;
    s.silhouette = silhouette(features, labels);
    const MetricValue db = davies_bouldin(features, labels);
    const MetricValue ch = calinski_harabasz(features, labels);
    s.davies_bouldin = db.value;
    s.calinski_harabasz = ch.value;
    s.degenerate = db.degenerate || ch.degenerate || collapsed_regime(db.value, ch.value);
    return s;
}

}  // namespace qclust::cluster
