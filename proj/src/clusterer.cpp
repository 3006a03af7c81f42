#include "iovsim/clusterer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "iovsim/errors.hpp"

namespace iovsim {

namespace {

double sqdist(const FeaturePoint& a, const FeaturePoint& b) {
    const double d0 = a[0] - b[0];
    const double d1 = a[1] - b[1];
    return d0 * d0 + d1 * d1;
}

std::array<std::array<double, 2>, 2> feature_extrema(std::span<const FeaturePoint> points) {
    std::array<std::array<double, 2>, 2> scale{};
    for (int f = 0; f < 2; ++f) {
        double lo = points[0][f], hi = points[0][f];
        for (const auto& p : points) {
            lo = std::min(lo, p[f]);
            hi = std::max(hi, p[f]);
        }
        scale[f] = {lo, hi};
    }
    return scale;
}

FeaturePoint scale_point(const FeaturePoint& raw,
                         const std::array<std::array<double, 2>, 2>& scale) {
    FeaturePoint out;
    for (int f = 0; f < 2; ++f) {
        const double denom = scale[f][1] - scale[f][0];
        out[f] = denom != 0.0 ? (raw[f] - scale[f][0]) / denom : 0.0;
    }
    return out;
}

}  // namespace

FeaturePoint ClusterModel::normalize(const FeaturePoint& raw) const {
    return scale_point(raw, feature_scale);
}

std::size_t ClusterModel::nearest(const FeaturePoint& raw) const {
    const FeaturePoint p = normalize(raw);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = sqdist(p, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

std::vector<FeaturePoint> kmeans_pp_init(std::span<const FeaturePoint> points, std::size_t k,
                                         Rng& rng) {
    if (points.size() < k) throw TooFewPoints("k-means++ needs at least k points");
    std::vector<FeaturePoint> centroids;
    centroids.reserve(k);
    centroids.push_back(points[rng.uniform_int(uint64_t{0}, uint64_t(points.size() - 1))]);

    std::vector<double> d2(points.size());
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            double best = sqdist(points[i], centroids[0]);
            for (std::size_t c = 1; c < centroids.size(); ++c)
                best = std::min(best, sqdist(points[i], centroids[c]));
            d2[i] = best;
            total += best;
        }
        std::size_t pick;
        if (total == 0.0) {
            // all points coincide with chosen centroids; fall back to uniform
            pick = std::size_t(rng.uniform_int(uint64_t{0}, uint64_t(points.size() - 1)));
        } else {
            const double u = rng.uniform01() * total;
            double cum = 0.0;
            pick = points.size() - 1;
            for (std::size_t i = 0; i < points.size(); ++i) {
                cum += d2[i];
                if (u < cum) {
                    pick = i;
                    break;
                }
            }
        }
        centroids.push_back(points[pick]);
    }
    return centroids;
}

FitResult fit(std::span<const FeaturePoint> points, std::size_t k, Rng& rng, std::size_t max_iter,
              double tol) {
    if (k == 0) throw ConfigError("k must be >= 1");
    if (points.size() < k) throw TooFewPoints("k-means needs at least k points");

    FitResult res;
    res.model.k = k;
    res.model.feature_scale = feature_extrema(points);

    std::vector<FeaturePoint> norm(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        norm[i] = scale_point(points[i], res.model.feature_scale);

    auto centroids = kmeans_pp_init(norm, k, rng);
    res.labels.assign(points.size(), 0);

    double prev_wcss = std::numeric_limits<double>::infinity();
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        res.iterations = iter + 1;

        // assignment
        double wcss = 0.0;
        for (std::size_t i = 0; i < norm.size(); ++i) {
            std::size_t best = 0;
            double best_d = sqdist(norm[i], centroids[0]);
            for (std::size_t c = 1; c < k; ++c) {
                const double d = sqdist(norm[i], centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            res.labels[i] = int(best);
            wcss += best_d;
        }
        if (wcss > prev_wcss + 1e-9)
            throw InternalError("k-means: within-cluster sum of squares increased");
        prev_wcss = wcss;
        res.wcss = wcss;

        // mean update; empty clusters reseed from the farthest point
        std::vector<FeaturePoint> sums(k, {0.0, 0.0});
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < norm.size(); ++i) {
            sums[res.labels[i]][0] += norm[i][0];
            sums[res.labels[i]][1] += norm[i][1];
            counts[res.labels[i]] += 1;
        }
        double movement = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            FeaturePoint next;
            if (counts[c] == 0) {
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < norm.size(); ++i) {
                    const double d = sqdist(norm[i], centroids[res.labels[i]]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                next = norm[far];
                prev_wcss = std::numeric_limits<double>::infinity();  // reseed may shift WCSS
            } else {
                next = {sums[c][0] / double(counts[c]), sums[c][1] / double(counts[c])};
            }
            movement = std::max(movement, std::sqrt(sqdist(next, centroids[c])));
            centroids[c] = next;
        }
        if (movement < tol) break;
    }

    res.model.centroids = centroids;
    // the critical cluster carries the lowest priority value (1 = most urgent)
    std::size_t crit = 0;
    for (std::size_t c = 1; c < k; ++c) {
        if (centroids[c][1] < centroids[crit][1] ||
            (centroids[c][1] == centroids[crit][1] && centroids[c][0] < centroids[crit][0]))
            crit = c;
    }
    res.model.critical_index = crit;
    return res;
}

double silhouette(std::span<const FeaturePoint> points, std::span<const int> labels) {
    if (points.size() != labels.size()) throw LengthMismatch("silhouette: size mismatch");
    if (points.empty()) throw EmptyInput("silhouette: no points");

    int max_label = 0;
    for (int l : labels) max_label = std::max(max_label, l);
    const std::size_t k = std::size_t(max_label) + 1;
    std::vector<std::size_t> counts(k, 0);
    for (int l : labels) counts[std::size_t(l)] += 1;
    std::size_t populated = 0;
    for (auto c : counts) populated += c > 0 ? 1 : 0;
    if (populated < 2) throw DegenerateClustering("silhouette needs two populated clusters");

    double total = 0.0;
    std::vector<double> mean_dist(k);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto li = std::size_t(labels[i]);
        if (counts[li] == 1) continue;  // singleton scores 0
        std::fill(mean_dist.begin(), mean_dist.end(), 0.0);
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (i == j) continue;
            mean_dist[std::size_t(labels[j])] += std::sqrt(sqdist(points[i], points[j]));
        }
        const double a = mean_dist[li] / double(counts[li] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (c == li || counts[c] == 0) continue;
            b = std::min(b, mean_dist[c] / double(counts[c]));
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / double(points.size());
}

PacketClass classify(const ClusterModel& model, const PacketHeader& header) {
    const auto f = criticality_features(header);
    return model.nearest({f[0], f[1]}) == model.critical_index ? PacketClass::Critical
                                                               : PacketClass::NonCritical;
}

void save_cluster_model(const ClusterModel& model, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write " + file.string());
    char buf[128];
    out << "iovsim-cluster-model v1\n";
    out << "k " << model.k << '\n';
    std::snprintf(buf, sizeof buf, "feature_scale ttl %.9g %.9g\n", model.feature_scale[0][0],
                  model.feature_scale[0][1]);
    out << buf;
    std::snprintf(buf, sizeof buf, "feature_scale priority %.9g %.9g\n", model.feature_scale[1][0],
                  model.feature_scale[1][1]);
    out << buf;
    out << "critical_index " << model.critical_index << '\n';
    for (const auto& c : model.centroids) {
        std::snprintf(buf, sizeof buf, "centroid %.9g %.9g\n", c[0], c[1]);
        out << buf;
    }
}

ClusterModel load_cluster_model(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open cluster model: " + file.string());
    std::string line;
    if (!std::getline(in, line) || line != "iovsim-cluster-model v1")
        throw DataError("not an iovsim cluster model: " + file.string());
    ClusterModel model;
    std::string key;
    while (in >> key) {
        if (key == "k") in >> model.k;
        else if (key == "feature_scale") {
            std::string which;
            double lo, hi;
            in >> which >> lo >> hi;
            model.feature_scale[which == "ttl" ? 0 : 1] = {lo, hi};
        } else if (key == "critical_index") in >> model.critical_index;
        else if (key == "centroid") {
            FeaturePoint c;
            in >> c[0] >> c[1];
            model.centroids.push_back(c);
        } else {
            throw DataError("cluster model: unknown key '" + key + "'");
        }
        if (!in) throw DataError("cluster model: malformed value after '" + key + "'");
    }
    if (model.centroids.size() != model.k) throw DataError("cluster model: centroid count");
    return model;
}

}  // namespace iovsim
