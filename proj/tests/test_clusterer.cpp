#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "iovsim/clusterer.hpp"
#include "iovsim/errors.hpp"

using namespace iovsim;
namespace fs = std::filesystem;

namespace {

// exhaustive optimal 2-partition by WCSS (centroids at cluster means)
double brute_force_wcss(const std::vector<FeaturePoint>& pts, std::vector<int>* best_labels) {
    const std::size_t n = pts.size();
    double best = std::numeric_limits<double>::infinity();
    for (uint32_t mask = 1; mask < (1u << n) - 1; ++mask) {
        FeaturePoint mean[2] = {{0, 0}, {0, 0}};
        std::size_t count[2] = {0, 0};
        for (std::size_t i = 0; i < n; ++i) {
            const int c = (mask >> i) & 1;
            mean[c][0] += pts[i][0];
            mean[c][1] += pts[i][1];
            count[c] += 1;
        }
        for (int c = 0; c < 2; ++c) {
            if (count[c] == 0) continue;
            mean[c][0] /= double(count[c]);
            mean[c][1] /= double(count[c]);
        }
        double wcss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const int c = (mask >> i) & 1;
            const double d0 = pts[i][0] - mean[c][0];
            const double d1 = pts[i][1] - mean[c][1];
            wcss += d0 * d0 + d1 * d1;
        }
        if (wcss < best) {
            best = wcss;
            if (best_labels) {
                best_labels->resize(n);
                for (std::size_t i = 0; i < n; ++i) (*best_labels)[i] = (mask >> i) & 1;
            }
        }
    }
    return best;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    bool direct = true, flipped = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        direct &= a[i] == b[i];
        flipped &= a[i] == 1 - b[i];
    }
    return direct || flipped;
}

}  // namespace

TEST_CASE("too few points is an error") {
    Rng rng(1);
    std::vector<FeaturePoint> one = {{1.0, 1.0}};
    CHECK_THROWS_AS(fit(one, 2, rng), TooFewPoints);
    CHECK_THROWS_AS(kmeans_pp_init(one, 2, rng), TooFewPoints);
}

TEST_CASE("N = k makes every point a centroid") {
    Rng rng(2);
    std::vector<FeaturePoint> pts = {{0.0, 0.0}, {1.0, 0.5}, {0.25, 1.0}};
    auto centroids = kmeans_pp_init(pts, 3, rng);
    REQUIRE(centroids.size() == 3);
    std::sort(centroids.begin(), centroids.end());
    auto sorted = pts;
    std::sort(sorted.begin(), sorted.end());
    CHECK(centroids == sorted);
}

TEST_CASE("two far clouds get one seed each (99+ of 100 seeds)") {
    std::vector<FeaturePoint> pts;
    Rng gen(3);
    for (int i = 0; i < 20; ++i) pts.push_back({gen.uniform(0.0, 0.05), gen.uniform(0.0, 0.05)});
    for (int i = 0; i < 20; ++i) pts.push_back({gen.uniform(0.95, 1.0), gen.uniform(0.95, 1.0)});
    int split_ok = 0;
    for (uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(seed);
        const auto centroids = kmeans_pp_init(pts, 2, rng);
        const bool left0 = centroids[0][0] < 0.5;
        const bool left1 = centroids[1][0] < 0.5;
        split_ok += left0 != left1 ? 1 : 0;
    }
    CHECK(split_ok >= 99);
}

TEST_CASE("identical points fall back to a uniform second seed") {
    Rng rng(4);
    std::vector<FeaturePoint> pts(10, FeaturePoint{2.0, 3.0});
    const auto centroids = kmeans_pp_init(pts, 2, rng);
    CHECK(centroids[0] == FeaturePoint{2.0, 3.0});
    CHECK(centroids[1] == FeaturePoint{2.0, 3.0});
}

TEST_CASE("two points, k = 2: singleton clusters with zero WCSS") {
    Rng rng(5);
    std::vector<FeaturePoint> pts = {{1.0, 2.0}, {5.0, 9.0}};
    const auto res = fit(pts, 2, rng);
    CHECK(res.wcss == 0.0);
    CHECK(res.labels[0] != res.labels[1]);
    // centroids coincide with the (normalized) points
    const auto n0 = res.model.normalize(pts[0]);
    const auto c0 = res.model.centroids[std::size_t(res.labels[0])];
    CHECK(n0[0] == doctest::Approx(c0[0]));
    CHECK(n0[1] == doctest::Approx(c0[1]));
}

TEST_CASE("six points in two triads match the brute-force optimum") {
    // already in [0,1]-ish scale so normalization keeps the geometry
    std::vector<FeaturePoint> pts = {{0.0, 0.1}, {0.1, 0.0}, {0.05, 0.12},
                                     {0.9, 1.0}, {1.0, 0.9}, {0.93, 0.95}};
    std::vector<int> want;
    brute_force_wcss(pts, &want);
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        const auto res = fit(pts, 2, rng);
        CHECK(same_partition(res.labels, want));
    }
}

TEST_CASE("six-point fixtures: lloyd WCSS equals the brute-force optimum") {
    Rng gen(6);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<FeaturePoint> pts;
        for (int i = 0; i < 3; ++i) pts.push_back({gen.uniform(0.0, 0.2), gen.uniform(0.0, 0.2)});
        for (int i = 0; i < 3; ++i) pts.push_back({gen.uniform(0.7, 1.0), gen.uniform(0.7, 1.0)});
        std::vector<FeaturePoint> norm;
        // normalize the same way fit does, so WCSS values are comparable
        ClusterModel scale_model;
        {
            Rng rng(trial + 1);
            const auto res = fit(pts, 2, rng);
            scale_model = res.model;
            norm.reserve(pts.size());
            for (const auto& p : pts) norm.push_back(scale_model.normalize(p));
            const double optimum = brute_force_wcss(norm, nullptr);
            CHECK(res.wcss == doctest::Approx(optimum).epsilon(1e-9));
        }
    }
}

TEST_CASE("fit is deterministic given the seed") {
    Rng gen(7);
    std::vector<FeaturePoint> pts;
    for (int i = 0; i < 200; ++i) pts.push_back({gen.uniform(0.0, 8.0), gen.uniform(1.0, 20.0)});
    Rng r1(42), r2(42);
    const auto a = fit(pts, 2, r1);
    const auto b = fit(pts, 2, r2);
    CHECK(a.labels == b.labels);
    CHECK(a.model.centroids == b.model.centroids);
}

TEST_CASE("silhouette: two tight distant clouds score above 0.8") {
    std::vector<FeaturePoint> pts;
    std::vector<int> labels;
    Rng gen(8);
    for (int i = 0; i < 30; ++i) {
        pts.push_back({gen.uniform(0.0, 0.02), gen.uniform(0.0, 0.02)});
        labels.push_back(0);
        pts.push_back({gen.uniform(0.98, 1.0), gen.uniform(0.98, 1.0)});
        labels.push_back(1);
    }
    CHECK(silhouette(pts, labels) > 0.8);
}

TEST_CASE("silhouette: singletons score zero") {
    std::vector<FeaturePoint> pts = {{0.0, 0.0}, {1.0, 1.0}};
    std::vector<int> labels = {0, 1};
    CHECK(silhouette(pts, labels) == 0.0);
}

TEST_CASE("silhouette: interleaved identical points score non-positive") {
    std::vector<FeaturePoint> pts(20, FeaturePoint{0.5, 0.5});
    std::vector<int> labels;
    for (int i = 0; i < 20; ++i) labels.push_back(i % 2);
    CHECK(silhouette(pts, labels) <= 0.0);
}

TEST_CASE("silhouette rejects a single populated cluster") {
    std::vector<FeaturePoint> pts = {{0.0, 0.0}, {1.0, 1.0}};
    std::vector<int> labels = {0, 0};
    CHECK_THROWS_AS(silhouette(pts, labels), DegenerateClustering);
}

TEST_CASE("classification: lower-priority centroid is the critical class") {
    // safety-like cloud: priority 1..10; normal cloud: 11..20
    std::vector<FeaturePoint> pts;
    Rng gen(9);
    for (int i = 0; i < 300; ++i) {
        pts.push_back({double(gen.uniform_int(0, 8)), double(gen.uniform_int(1, 10))});
        pts.push_back({double(gen.uniform_int(0, 8)), double(gen.uniform_int(11, 20))});
    }
    Rng rng(10);
    const auto res = fit(pts, 2, rng);

    PacketHeader urgent;
    urgent.ttl = 1;
    urgent.priority = 1;
    CHECK(classify(res.model, urgent) == PacketClass::Critical);

    PacketHeader lazy;
    lazy.ttl = 50;
    lazy.priority = 20;
    CHECK(classify(res.model, lazy) == PacketClass::NonCritical);

    // a header exactly at a centroid classifies as that centroid
    const auto c = res.model.centroids[res.model.critical_index];
    PacketHeader at_centroid;
    const auto& scale = res.model.feature_scale;
    at_centroid.ttl = int(std::lround(c[0] * (scale[0][1] - scale[0][0]) + scale[0][0]));
    at_centroid.priority = int(std::lround(c[1] * (scale[1][1] - scale[1][0]) + scale[1][0]));
    CHECK(classify(res.model, at_centroid) == PacketClass::Critical);
}

TEST_CASE("classify is scale-consistent") {
    std::vector<FeaturePoint> pts;
    Rng gen(11);
    for (int i = 0; i < 100; ++i)
        pts.push_back({gen.uniform(0.0, 8.0), double(gen.uniform_int(1, 20))});
    Rng rng(12);
    const auto res = fit(pts, 2, rng);
    for (int i = 0; i < 100; ++i) {
        PacketHeader h;
        h.ttl = gen.uniform_int(0, 8);
        h.priority = gen.uniform_int(1, 20);
        // classifying through normalize() and through nearest() must agree
        const auto direct = res.model.nearest({double(h.ttl), double(h.priority)});
        const auto via_class = classify(res.model, h) == PacketClass::Critical
                                   ? res.model.critical_index
                                   : 1 - res.model.critical_index;
        CHECK(direct == via_class);
    }
}

TEST_CASE("model file round-trips at 9 significant digits") {
    std::vector<FeaturePoint> pts;
    Rng gen(13);
    for (int i = 0; i < 50; ++i) pts.push_back({gen.uniform(0.0, 8.0), gen.uniform(1.0, 20.0)});
    Rng rng(14);
    const auto res = fit(pts, 2, rng);

    const fs::path file = fs::temp_directory_path() / "iovsim_cluster_model.txt";
    save_cluster_model(res.model, file);
    const auto loaded = load_cluster_model(file);
    CHECK(loaded.k == res.model.k);
    CHECK(loaded.critical_index == res.model.critical_index);
    for (std::size_t c = 0; c < loaded.k; ++c) {
        CHECK(loaded.centroids[c][0] == doctest::Approx(res.model.centroids[c][0]).epsilon(1e-8));
        CHECK(loaded.centroids[c][1] == doctest::Approx(res.model.centroids[c][1]).epsilon(1e-8));
    }
    fs::remove(file);
}
