#pragma once

#include <vector>

#include "tactictraj/metrics.hpp"
#include "tactictraj/model.hpp"

namespace tactictraj {

inline Tensor truth_tensor(const Scene& scene, std::size_t t_obs, std::size_t t_pred) {
    Tensor truth({scene.n_agents(), t_pred, 2});
    for (std::size_t i = 0; i < scene.n_agents(); ++i) {
        for (std::size_t t = 0; t < t_pred; ++t) {
            truth[truth.offset({i, t, 0})] = scene.x(i, t_obs + t);
            truth[truth.offset({i, t, 1})] = scene.y(i, t_obs + t);
        }
    }
    return truth;
}

/// Constant-velocity extrapolation from the last two observed frames,
/// shaped [1, N, T_pred, 2] so it plugs into the best-of-S metrics.
inline Tensor constant_velocity_baseline(const Scene& scene, std::size_t t_obs,
                                         std::size_t t_pred) {
    Tensor pred({1, scene.n_agents(), t_pred, 2});
    for (std::size_t i = 0; i < scene.n_agents(); ++i) {
        const double x1 = scene.x(i, t_obs - 1), y1 = scene.y(i, t_obs - 1);
        const double x0 = t_obs >= 2 ? scene.x(i, t_obs - 2) : x1;
        const double y0 = t_obs >= 2 ? scene.y(i, t_obs - 2) : y1;
        const double vx = x1 - x0, vy = y1 - y0;
        for (std::size_t t = 0; t < t_pred; ++t) {
            pred[pred.offset({0, i, t, 0})] = x1 + vx * static_cast<double>(t + 1);
            pred[pred.offset({0, i, t, 1})] = y1 + vy * static_cast<double>(t + 1);
        }
    }
    return pred;
}

/// Horizon frame counts for the 1/2/3/4-second report rows.
inline std::vector<std::pair<std::string, std::size_t>> report_horizons(int fps,
                                                                        std::size_t t_pred) {
    std::vector<std::pair<std::string, std::size_t>> out;
    for (int sec = 1; sec <= 4; ++sec) {
        const std::size_t frames = static_cast<std::size_t>(sec * fps);
        if (frames <= t_pred) out.push_back({std::to_string(sec) + ".0", frames});
    }
    return out;
}

/// Sample S trajectories per scene and score displacement + Top-k accuracy.
inline EvalReport evaluate_model(Model& m, const std::vector<Scene>& scenes, std::uint64_t seed) {
    if (scenes.empty()) throw ArgumentError("evaluation needs a nonempty dataset");
    const auto horizons = report_horizons(m.data.fps, m.data.t_pred);

    EvalReport report;
    report.n_scenes = scenes.size();
    report.config_snapshot = json{{"n_samples", m.cfg.n_samples},
                                  {"guide_scale", m.cfg.guide_scale},
                                  {"denoise_steps_used", m.cfg.denoise_steps_used},
                                  {"seed", seed}};

    std::map<std::string, double> ade_sum, fde_sum;
    std::vector<std::vector<int>> predicted_labels;
    std::vector<int> true_labels;

    SeededRng rng(seed);
    for (std::size_t idx = 0; idx < scenes.size(); ++idx) {
        const Scene& scene = scenes[idx];
        SeededRng scene_rng = rng.substream(0xE7A1ULL + idx);
        Tensor preds = m.sample_trajectories(scene, scene_rng);
        Tensor truth = truth_tensor(scene, m.data.t_obs, m.data.t_pred);
        for (const auto& [name, frames] : horizons) {
            ade_sum[name] += min_ade(preds, truth, frames);
            fde_sum[name] += min_fde(preds, truth, frames);
        }
        auto branch = m.predict_tactics_forward(scene);
        for (std::size_t j = 0; j < m.data.m_teams; ++j) {
            predicted_labels.push_back(branch.per_team[j].top_labels);
            true_labels.push_back(scene.tactics_of(static_cast<int>(j)).future);
        }
    }

    for (const auto& [name, frames] : horizons) {
        report.min_ade_by_horizon[name] = ade_sum[name] / static_cast<double>(scenes.size());
        report.min_fde_by_horizon[name] = fde_sum[name] / static_cast<double>(scenes.size());
    }
    for (std::size_t k : {std::size_t{1}, std::size_t{2}, std::size_t{3}, std::size_t{5}}) {
        if (k <= m.cfg.k_top) {
            report.topk[std::to_string(k)] = topk_accuracy(predicted_labels, true_labels, k);
        }
    }
    return report;
}

/// Mean best-of-S ADE at the full horizon with the observed labels replaced
/// per team by `label_override(team, true_observed)`; used for the
/// conditioning-fidelity comparison.
inline double mean_min_ade_with_labels(
    Model& m, const std::vector<Scene>& scenes, std::uint64_t seed,
    const std::function<int(const Scene&, int team, int observed)>& label_override) {
    double total = 0.0;
    SeededRng rng(seed);
    for (std::size_t idx = 0; idx < scenes.size(); ++idx) {
        Scene scene = scenes[idx];
        if (label_override) {
            for (auto& t : scene.tactics) t.observed = label_override(scene, t.team, t.observed);
        }
        SeededRng scene_rng = rng.substream(0xE7A1ULL + idx);
        Tensor preds = m.sample_trajectories(scene, scene_rng);
        Tensor truth = truth_tensor(scenes[idx], m.data.t_obs, m.data.t_pred);
        total += min_ade(preds, truth, m.data.t_pred);
    }
    return total / static_cast<double>(scenes.size());
}

}  // namespace tactictraj
