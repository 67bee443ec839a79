#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "streampipe/dbscan.hpp"
#include "streampipe/dbscan_reference.hpp"
#include "streampipe/rng.hpp"
#include "test_util.hpp"

using namespace streampipe;

namespace {

std::vector<std::vector<double>> two_blobs(Rng& rng, int per_blob, double spread,
                                           double separation) {
  std::vector<std::vector<double>> pts;
  for (int b = 0; b < 2; ++b)
    for (int i = 0; i < per_blob; ++i)
      pts.push_back({b * separation + spread * rng.normal(), spread * rng.normal()});
  return pts;
}

}  // namespace

TEST_CASE("dbscan degenerate cases") {
  SUBCASE("identical points form one cluster with no noise") {
    const std::vector<std::vector<double>> pts(5, {1.0, 2.0});
    const auto labels = dbscan(pts, 0.5, 4, Metric::euclidean);
    CHECK(labels.num_clusters == 1);
    for (int l : labels.labels) CHECK(l == 0);
  }
  SUBCASE("an isolated point is noise at min_pts 2") {
    const auto labels = dbscan({{0.0, 0.0}}, 0.5, 2, Metric::euclidean);
    CHECK(labels.labels == std::vector<int>{kNoiseLabel});
    CHECK(labels.num_clusters == 0);
  }
  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(dbscan({{0.0}}, 0.0, 2, Metric::euclidean), std::invalid_argument);
    CHECK_THROWS_AS(dbscan({{0.0}}, 0.5, 0, Metric::euclidean), std::invalid_argument);
  }
}

TEST_CASE("two tight blobs become exactly two clusters") {
  Rng rng(4);
  const auto pts = two_blobs(rng, 20, 0.01, 1.0);
  const auto labels = dbscan(pts, 0.1, 4, Metric::euclidean);
  CHECK(labels.num_clusters == 2);
  for (int l : labels.labels) CHECK(l != kNoiseLabel);
  CHECK(same_partition(labels, dbscan_reference(pts, 0.1, 4, Metric::euclidean)));
}

TEST_CASE("main implementation matches the naive reference partition for partition") {
  Rng rng(14);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 200));
    const auto pts = testutil::random_points(rng, n, 2, 1.0);
    const double eps = 0.03 + rng.uniform() * 0.1;
    const int min_pts = 2 + static_cast<int>(rng.uniform_int(0, 4));
    const auto fast = dbscan(pts, eps, min_pts, Metric::euclidean);
    const auto naive = dbscan_reference(pts, eps, min_pts, Metric::euclidean);
    REQUIRE(fast.labels == naive.labels);  // same expansion order: identical, not just isomorphic
  }
}

TEST_CASE("partitions are invariant to input permutation on separated data") {
  Rng rng(25);
  for (int trial = 0; trial < 20; ++trial) {
    auto pts = two_blobs(rng, 15, 0.02, 2.0);
    const auto before = dbscan(pts, 0.15, 3, Metric::euclidean);

    std::vector<std::size_t> perm(pts.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    for (std::size_t i = perm.size(); i > 1; --i)
      std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)))]);
    std::vector<std::vector<double>> shuffled(pts.size());
    for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = pts[perm[i]];
    const auto after = dbscan(shuffled, 0.15, 3, Metric::euclidean);

    // Undo the permutation and compare as partitions.
    ClusterLabels realigned = after;
    for (std::size_t i = 0; i < perm.size(); ++i) realigned.labels[perm[i]] = after.labels[i];
    CHECK(same_partition(before, realigned));
  }
}

TEST_CASE("min_pts of 1 leaves no noise") {
  Rng rng(31);
  const auto pts = testutil::random_points(rng, 100, 2, 1.0);
  const auto labels = dbscan(pts, 0.05, 1, Metric::euclidean);
  for (int l : labels.labels) CHECK(l != kNoiseLabel);
}

TEST_CASE("cluster ids are contiguous from zero") {
  Rng rng(44);
  const auto pts = testutil::random_points(rng, 120, 2, 1.0);
  const auto labels = dbscan(pts, 0.08, 3, Metric::euclidean);
  std::vector<bool> seen(static_cast<std::size_t>(labels.num_clusters), false);
  for (int l : labels.labels) {
    if (l == kNoiseLabel) continue;
    REQUIRE(l >= 0);
    REQUIRE(l < labels.num_clusters);
    seen[static_cast<std::size_t>(l)] = true;
  }
  for (bool s : seen) CHECK(s);
}

TEST_CASE("cluster_purity") {
  SUBCASE("perfect clustering scores 1") {
    ClusterLabels labels;
    labels.labels = {0, 0, 1, 1};
    labels.num_clusters = 2;
    CHECK(cluster_purity(labels, {7, 7, 9, 9}) == doctest::Approx(1.0));
  }
  SUBCASE("a 3-vs-1 cluster scores 0.75") {
    ClusterLabels labels;
    labels.labels = {0, 0, 0, 0};
    labels.num_clusters = 1;
    CHECK(cluster_purity(labels, {1, 1, 1, 2}) == doctest::Approx(0.75));
  }
  SUBCASE("noise points are excluded") {
    ClusterLabels labels;
    labels.labels = {0, 0, kNoiseLabel};
    labels.num_clusters = 1;
    CHECK(cluster_purity(labels, {1, 1, 2}) == doctest::Approx(1.0));
  }
  SUBCASE("all-noise input is an error") {
    ClusterLabels labels;
    labels.labels = {kNoiseLabel, kNoiseLabel};
    CHECK_THROWS_AS(cluster_purity(labels, {1, 2}), std::invalid_argument);
  }
  SUBCASE("random labels over balanced identities trend to 1/identities") {
    Rng rng(60);
    const int num_identities = 4;
    double total = 0.0;
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
      ClusterLabels labels;
      std::vector<int> gt;
      for (int i = 0; i < 400; ++i) {
        labels.labels.push_back(static_cast<int>(rng.uniform_int(0, 8)));
        gt.push_back(static_cast<int>(rng.uniform_int(0, num_identities)));
      }
      labels.num_clusters = 8;
      total += cluster_purity(labels, gt);
    }
    CHECK(total / trials == doctest::Approx(1.0 / num_identities).epsilon(0.15));
  }
}
