#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tactictraj/errors.hpp"
#include "tactictraj/tensor.hpp"

namespace tactictraj {

using nlohmann::json;

/// Best-of-S average displacement over frames 1..h (meters).
/// predictions: [S, N, T, 2], truth: [N, T, 2].
inline double min_ade(const Tensor& predictions, const Tensor& truth, std::size_t horizon) {
    if (predictions.ndim() != 4 || truth.ndim() != 3) {
        throw ShapeError("min_ade expects [S,N,T,2] predictions and [N,T,2] truth");
    }
    const std::size_t s_count = predictions.shape()[0];
    const std::size_t n = predictions.shape()[1];
    const std::size_t t = predictions.shape()[2];
    if (s_count < 1) throw ArgumentError("min_ade requires S >= 1");
    if (horizon < 1 || horizon > t) {
        throw ArgumentError("horizon " + std::to_string(horizon) + " outside [1, " +
                            std::to_string(t) + "]");
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < s_count; ++s) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t f = 0; f < horizon; ++f) {
                const double dx = predictions[predictions.offset({s, i, f, 0})] -
                                  truth[truth.offset({i, f, 0})];
                const double dy = predictions[predictions.offset({s, i, f, 1})] -
                                  truth[truth.offset({i, f, 1})];
                total += std::hypot(dx, dy);
            }
        }
        best = std::min(best, total / static_cast<double>(n * horizon));
    }
    return best;
}

/// Best-of-S displacement at frame h only, averaged over agents.
inline double min_fde(const Tensor& predictions, const Tensor& truth, std::size_t horizon) {
    if (predictions.ndim() != 4 || truth.ndim() != 3) {
        throw ShapeError("min_fde expects [S,N,T,2] predictions and [N,T,2] truth");
    }
    const std::size_t s_count = predictions.shape()[0];
    const std::size_t n = predictions.shape()[1];
    const std::size_t t = predictions.shape()[2];
    if (s_count < 1) throw ArgumentError("min_fde requires S >= 1");
    if (horizon < 1 || horizon > t) {
        throw ArgumentError("horizon " + std::to_string(horizon) + " outside [1, " +
                            std::to_string(t) + "]");
    }
    const std::size_t f = horizon - 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < s_count; ++s) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dx =
                predictions[predictions.offset({s, i, f, 0})] - truth[truth.offset({i, f, 0})];
            const double dy =
                predictions[predictions.offset({s, i, f, 1})] - truth[truth.offset({i, f, 1})];
            total += std::hypot(dx, dy);
        }
        best = std::min(best, total / static_cast<double>(n));
    }
    return best;
}

/// Fraction of (scene, team) pairs whose truth appears in the first k labels.
inline double topk_accuracy(const std::vector<std::vector<int>>& predicted_labels,
                            const std::vector<int>& truths, std::size_t k) {
    if (predicted_labels.empty() || predicted_labels.size() != truths.size()) {
        throw ArgumentError("topk_accuracy needs matching, nonempty prediction/truth lists");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (k > predicted_labels[i].size()) {
            throw ArgumentError("k=" + std::to_string(k) + " exceeds prediction list of " +
                                std::to_string(predicted_labels[i].size()));
        }
        for (std::size_t r = 0; r < k; ++r) {
            if (predicted_labels[i][r] == truths[i]) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(truths.size());
}

/// Displacement metrics at the four reporting horizons plus Top-k accuracy.
struct EvalReport {
    std::map<std::string, double> min_ade_by_horizon;  // "1.0" .. "4.0" seconds
    std::map<std::string, double> min_fde_by_horizon;
    std::map<std::string, double> topk;  // "1","2","3","5"
    std::size_t n_scenes = 0;
    json config_snapshot;

    json to_json() const {
        return json{{"n_scenes", n_scenes},
                    {"min_ade", min_ade_by_horizon},
                    {"min_fde", min_fde_by_horizon},
                    {"topk_accuracy", topk},
                    {"config", config_snapshot}};
    }

    /// One CSV row per horizon: horizon_s,min_ade,min_fde.
    std::string to_csv() const {
        std::ostringstream os;
        os << "horizon_s,min_ade,min_fde\n";
        for (const auto& [h, ade] : min_ade_by_horizon) {
            os << h << "," << ade << "," << min_fde_by_horizon.at(h) << "\n";
        }
        return os.str();
    }
};

}  // namespace tactictraj
