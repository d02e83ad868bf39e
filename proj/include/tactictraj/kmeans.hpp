#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "tactictraj/scene.hpp"

namespace tactictraj {

namespace kmeans_detail {

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

/// Lloyd's algorithm with k-means++ seeding on generic feature vectors.
inline std::vector<int> lloyd(const std::vector<std::vector<double>>& points, std::size_t k,
                              SeededRng& rng, std::size_t max_iters = 100, double tol = 1e-6) {
    const std::size_t n = points.size();
    const std::size_t dim = points[0].size();

    // k-means++ seeding.
    std::vector<std::vector<double>> centroids;
    centroids.push_back(points[rng.uniform_index(n)]);
    std::vector<double> d2(n);
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centroids) best = std::min(best, sq_dist(points[i], c));
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            centroids.push_back(points[rng.uniform_index(n)]);
            continue;
        }
        double u = rng.uniform() * total;
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            u -= d2[i];
            if (u <= 0.0) {
                pick = i;
                break;
            }
        }
        centroids.push_back(points[pick]);
    }

    std::vector<int> labels(n, 0);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int arg = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double d = sq_dist(points[i], centroids[c]);
                if (d < best) {
                    best = d;
                    arg = static_cast<int>(c);
                }
            }
            labels[i] = arg;
        }
        std::vector<std::vector<double>> next(k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[labels[i]];
            for (std::size_t d = 0; d < dim; ++d) next[labels[i]][d] += points[i][d];
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // empty cluster keeps its centroid
            for (std::size_t d = 0; d < dim; ++d) next[c][d] /= static_cast<double>(counts[c]);
            shift = std::max(shift, std::sqrt(sq_dist(next[c], centroids[c])));
            centroids[c] = next[c];
        }
        if (shift < tol) break;
    }
    return labels;
}

}  // namespace kmeans_detail

/// Cluster per-team motion patterns into k pseudo-labels. The feature for a
/// (scene, team) pair is the flattened trajectory of the team's players
/// relative to each player's first observed position.
/// Returns labels[scene][team] in [0, k).
inline std::vector<std::vector<int>> kmeans_pseudo_labels(const std::vector<Scene>& scenes,
                                                          std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ArgumentError("kmeans requires k >= 2");
    std::size_t n_teams = 0;
    for (const auto& s : scenes) n_teams += s.tactics.size();
    if (n_teams < k) {
        throw ArgumentError("fewer team samples (" + std::to_string(n_teams) +
                            ") than clusters k=" + std::to_string(k));
    }

    std::vector<std::vector<double>> points;
    points.reserve(n_teams);
    for (const auto& s : scenes) {
        for (const auto& t : s.tactics) {
            std::vector<double> feat;
            for (std::size_t agent : s.team_members(t.team)) {
                const double x0 = s.x(agent, 0), y0 = s.y(agent, 0);
                for (std::size_t f = 0; f < s.total_frames(); ++f) {
                    feat.push_back(s.x(agent, f) - x0);
                    feat.push_back(s.y(agent, f) - y0);
                }
            }
            points.push_back(std::move(feat));
        }
    }

    SeededRng rng(seed);
    std::vector<int> flat = kmeans_detail::lloyd(points, k, rng);

    std::vector<std::vector<int>> out;
    std::size_t cursor = 0;
    for (const auto& s : scenes) {
        std::vector<int> team_labels(s.tactics.size());
        for (std::size_t j = 0; j < s.tactics.size(); ++j) team_labels[j] = flat[cursor++];
        out.push_back(std::move(team_labels));
    }
    return out;
}

}  // namespace tactictraj
