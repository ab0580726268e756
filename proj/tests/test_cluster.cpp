#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "oracles.hpp"
#include "qclust/cluster.hpp"
#include "qclust/errors.hpp"

using namespace qclust;
using namespace qclust::cluster;

namespace {

Matrix to_matrix(const oracle::Points& p) {
    Matrix m(p.size(), p[0].size());
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t d = 0; d < p[0].size(); ++d) m(i, d) = p[i][d];
    return m;
}

const oracle::Points kFour = {{0, 0}, {0, 1}, {10, 0}, {10, 1}};

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j)
            if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    return true;
}

}  // namespace

TEST_CASE("kmeans four-point instance") {
    const auto res = kmeans(to_matrix(kFour), 2, {.seed = 3});
    CHECK(same_partition(res.labels, {0, 0, 1, 1}));
    CHECK(res.wcss == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(oracle::min_wcss(kFour, 2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kmeans degenerate data repairs empty clusters") {
    const auto res = kmeans(Matrix(6, 2, 3.5), 2, {.seed = 1});
    CHECK(res.wcss == 0.0);
    CHECK(std::set<int>(res.labels.begin(), res.labels.end()).size() == 2);
}

TEST_CASE("kmeans determinism and argument errors") {
    std::mt19937_64 rng(1);
    const auto x = to_matrix(oracle::random_points(rng, 60, 3));
    const auto a = kmeans(x, 4, {.seed = 17});
    const auto b = kmeans(x, 4, {.seed = 17});
    CHECK(a.labels == b.labels);
    CHECK(a.wcss == b.wcss);
    CHECK_THROWS_AS(kmeans(x, 61), ArgumentError);
    CHECK_THROWS_AS(kmeans(x, 1), ArgumentError);
}

TEST_CASE("kmeans invariants") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 10 + static_cast<std::size_t>(trial) * 4;
        const std::size_t k = 2 + static_cast<std::size_t>(trial) % 5;
        const auto x = to_matrix(oracle::random_points(rng, n, 2 + static_cast<std::size_t>(trial) % 3));
        const auto res = kmeans(x, k, {.seed = rng()});
        std::set<int> used(res.labels.begin(), res.labels.end());
        CHECK(used.size() == k);
        CHECK(*used.begin() == 0);
        CHECK(static_cast<std::size_t>(*used.rbegin()) == k - 1);
        const double recomputed = wcss(x, res.labels, res.centroids);
        CHECK(std::abs(recomputed - res.wcss) <= 1e-9 * std::max(1.0, res.wcss));
        for (std::size_t i = 1; i < res.wcss_trace.size(); ++i) {
            CHECK(res.wcss_trace[i] <= res.wcss_trace[i - 1] * (1 + 1e-12));
        }
    }
}

TEST_CASE("kmeans small-instance optimality") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 4 + static_cast<std::size_t>(trial) % 5;
        const int k = 2 + trial % 2;
        const auto pts = oracle::random_points(rng, n, 2);
        const auto res = kmeans(to_matrix(pts), static_cast<std::size_t>(k), {.seed = rng(), .restarts = 50});
        CHECK(oracle::wcss(pts, res.labels) == oracle::min_wcss(pts, k));
    }
}

TEST_CASE("metric worked values on the four-point instance") {
    const auto x = to_matrix(kFour);
    const std::vector<int> labels = {0, 0, 1, 1};
    const double sil = silhouette(x, labels);
    CHECK(std::abs(sil - 0.900) < 1e-3);
    CHECK(sil == doctest::Approx(1.0 - 1.0 / ((10.0 + std::sqrt(101.0)) / 2.0)).epsilon(1e-14));

    const auto db = davies_bouldin(x, labels);
    CHECK(db.value == doctest::Approx(0.1).epsilon(1e-14));
    CHECK_FALSE(db.degenerate);

    const auto ch = calinski_harabasz(x, labels);
    CHECK(ch.value == doctest::Approx(200.0).epsilon(1e-14));
    CHECK_FALSE(ch.degenerate);
}

TEST_CASE("metric edge cases") {
    const Matrix two(2, 2, std::vector<double>{0, 0, 5, 5});
    CHECK(silhouette(two, {0, 1}) == 0.0);
    CHECK_THROWS_AS(silhouette(two, {0, 0}), ArgumentError);
    CHECK_THROWS_AS(davies_bouldin(two, {1, 1}), ArgumentError);
    CHECK_THROWS_AS(calinski_harabasz(two, {0, 1}), ArgumentError);  // n must exceed k

    // perfectly tight clusters
    const Matrix tight(4, 1, std::vector<double>{0, 0, 3, 3});
    CHECK(davies_bouldin(tight, {0, 0, 1, 1}).value == 0.0);
    const auto ch = calinski_harabasz(tight, {0, 0, 1, 1});
    CHECK(ch.degenerate);
    CHECK(ch.value == kSentinel);
    const auto s = score(tight, {0, 0, 1, 1});
    CHECK(s.degenerate);

    // coincident centroids
    const Matrix sym(4, 1, std::vector<double>{-1, 1, -2, 2});
    const auto db = davies_bouldin(sym, {0, 0, 1, 1});
    CHECK(db.degenerate);
    CHECK(db.value == kSentinel);
}

TEST_CASE("collapsed regime thresholds") {
    CHECK(collapsed_regime(0.5, 2e12));
    CHECK(collapsed_regime(5e-7, 100));
    CHECK_FALSE(collapsed_regime(0.5, 1e12));
    CHECK_FALSE(collapsed_regime(1e-6, 100));
}

TEST_CASE("metrics agree with brute-force definitions") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 5 + static_cast<std::size_t>(trial) % 20;
        const int k = 2 + trial % 3;
        const auto pts = oracle::random_points(rng, n, 3);
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % static_cast<std::size_t>(k));
        std::shuffle(labels.begin(), labels.end(), rng);
        const auto x = to_matrix(pts);

        auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
        CHECK(std::abs(silhouette(x, labels) - oracle::silhouette(pts, labels)) < 1e-9);
        CHECK(rel(davies_bouldin(x, labels).value, oracle::davies_bouldin(pts, labels)) < 1e-9);
        CHECK(rel(calinski_harabasz(x, labels).value, oracle::calinski_harabasz(pts, labels)) < 1e-9);
    }
}

TEST_CASE("metrics are invariant to label permutation") {
    std::mt19937_64 rng(5);
    const auto pts = oracle::random_points(rng, 40, 2);
    const auto x = to_matrix(pts);
    std::vector<int> labels(40), relabeled(40);
    for (int i = 0; i < 40; ++i) labels[static_cast<std::size_t>(i)] = i % 4;
    const int perm[] = {2, 0, 3, 1};
    for (std::size_t i = 0; i < 40; ++i) relabeled[i] = perm[labels[i]];
    CHECK(std::abs(silhouette(x, labels) - silhouette(x, relabeled)) < 1e-12);
    CHECK(std::abs(davies_bouldin(x, labels).value - davies_bouldin(x, relabeled).value) < 1e-12);
    CHECK(std::abs(calinski_harabasz(x, labels).value - calinski_harabasz(x, relabeled).value) <
          1e-12 * calinski_harabasz(x, labels).value);
}

TEST_CASE("metric ranges and planted-vs-random Davies-Bouldin") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g(0.0, 0.3);
    Matrix x(90, 2);
    std::vector<int> planted(90);
    for (std::size_t i = 0; i < 90; ++i) {
        planted[i] = static_cast<int>(i % 3);
        x(i, 0) = 4.0 * planted[i] + g(rng);
        x(i, 1) = (planted[i] == 1 ? 3.0 : 0.0) + g(rng);
    }
    std::vector<int> random_labels(90);
    for (auto& l : random_labels) l = static_cast<int>(rng() % 3);

    const double s = silhouette(x, planted);
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
    CHECK(silhouette(x, random_labels) >= -1.0);
    CHECK(davies_bouldin(x, random_labels).value > davies_bouldin(x, planted).value);
    CHECK(calinski_harabasz(x, planted).value >= 0.0);
}
