#pragma once

// K-Means (Lloyd iterations from k-means++ seeds, best of several restarts)
// and the silhouette, Davies-Bouldin and Calinski-Harabasz validation indices.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qclust/matrix.hpp"

namespace qclust::cluster {

struct KMeansOptions {
    std::uint64_t seed = 0;
    std::size_t restarts = 10;
    std::size_t max_iters = 300;
    double tol = 1e-6;  // stop once no centroid moves farther than this
};

struct ClusterResult {
    std::vector<int> labels;
    Matrix centroids;  // k x n_dims
    double wcss = 0.0;
    std::size_t restart = 0;          // index of the winning restart
    std::size_t iterations = 0;       // Lloyd iterations of the winning restart
    std::vector<double> wcss_trace;   // WCSS after each iteration of the winning restart

    std::size_t k() const { return centroids.rows(); }
};

/// Throws ArgumentError when k < 2 or k > n_samples.
ClusterResult kmeans(const Matrix& features, std::size_t k, const KMeansOptions& options = {});

/// Sum of squared distances of each point to its label's centroid.
double wcss(const Matrix& features, const std::vector<int>& labels, const Matrix& centroids);

/// Mean of each labelled group; labels must lie in [0, k).
Matrix centroids_of(const Matrix& features, const std::vector<int>& labels, std::size_t k);

inline constexpr double kDegenerateEpsilon = 1e-30;
inline constexpr double kSentinel = 1e30;
// Regime thresholds that mark a near-collapsed clustering.
inline constexpr double kCollapsedCalinski = 1e12;
inline constexpr double kCollapsedDavies = 1e-6;

/// A metric value plus whether a degenerate-geometry guard fired.
struct MetricValue {
    double value = 0.0;
    bool degenerate = false;
};

/// Mean silhouette coefficient; points in singleton clusters score 0.
/// ArgumentError unless at least two distinct labels are present.
double silhouette(const Matrix& features, const std::vector<int>& labels);

/// When two centroids coincide (distance < 1e-30) their ratio becomes the
/// 1e30 sentinel (0 if both scatters are zero as well) and `degenerate` is set.
MetricValue davies_bouldin(const Matrix& features, const std::vector<int>& labels);

/// (B / (k-1)) / (W / (n-k)). W < 1e-30 yields the 1e30 sentinel with
/// `degenerate` set. ArgumentError unless 2 <= k < n.
MetricValue calinski_harabasz(const Matrix& features, const std::vector<int>& labels);

struct Scores {
    double silhouette = 0.0;
    double davies_bouldin = 0.0;
    double calinski_harabasz = 0.0;
    /// A guard fired, or CH > 1e12, or DB < 1e-6.
    bool degenerate = false;
};

Scores score(const Matrix& features, const std::vector<int>& labels);

bool collapsed_regime(double davies_bouldin, double calinski_harabasz);

}  // namespace qclust::cluster
