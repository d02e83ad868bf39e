#pragma once

#include <vector>

#include "tactictraj/config.hpp"
#include "tactictraj/enhance.hpp"
#include "tactictraj/layers.hpp"

namespace tactictraj {

inline MlpSpec learner_ctx_spec(const ModelConfig& cfg) {
    return {{cfg.d_a, 2 * cfg.lrn_hidden, cfg.lrn_hidden}};
}
inline MlpSpec learner_out_spec(const ModelConfig& cfg) {
    return {{cfg.lrn_hidden, cfg.lrn_hidden, cfg.k_top}};
}

inline void init_learner_params(ParamStore& ps, const ModelConfig& cfg, SeededRng& rng) {
    init_mlp(ps, "lrn.ctx", learner_ctx_spec(cfg), rng);
    init_self_attention(ps, "lrn.sa", {cfg.lrn_hidden, 1}, rng);
    init_mlp(ps, "lrn.out", learner_out_spec(cfg), rng);
}

/// Scene-wide interaction prediction I = softmax_rows(gamma_o(SA(gamma_ctx(A)))).
/// Row-softmax aligns the learner's range with the oracle targets in [0, 1].
inline Var predict_interaction_scene_g(Graph& g, ParamStore& ps, const ModelConfig& cfg, Var a) {
    Var ctx = mlp_apply(g, ps, "lrn.ctx", learner_ctx_spec(cfg), a);
    Var sa = g.add(ctx, self_attention_apply(g, ps, "lrn.sa", {cfg.lrn_hidden, 1}, ctx));
    Var logits = mlp_apply(g, ps, "lrn.out", learner_out_spec(cfg), sa);
    return g.softmax_rows(logits);
}

/// Per-team N_T x k slices of the scene-wide prediction (ball row shared).
inline std::vector<Var> slice_interaction_per_team_g(Graph& g, Var scene_interaction,
                                                     const Scene& scene,
                                                     const DatasetConfig& data) {
    std::vector<Var> out;
    for (std::size_t j = 0; j < data.m_teams; ++j) {
        const auto idx = team_token_indices(scene, static_cast<int>(j), data.n_team_tokens);
        out.push_back(g.gather_rows(scene_interaction, idx));
    }
    return out;
}

inline std::vector<Tensor> predict_interaction(ParamStore& ps, const ModelConfig& cfg,
                                               const Tensor& agent_embeddings, const Scene& scene,
                                               const DatasetConfig& data) {
    Graph g;
    Var scene_i = predict_interaction_scene_g(g, ps, cfg, g.input(agent_embeddings));
    auto vars = slice_interaction_per_team_g(g, scene_i, scene, data);
    std::vector<Tensor> out;
    for (Var v : vars) out.push_back(g.value(v));
    return out;
}

/// L_bi = sum over teams of the Frobenius norm of (I_pred - I_B).
inline double loss_bi(const std::vector<Tensor>& i_pred, const std::vector<Tensor>& i_b) {
    if (i_pred.size() != i_b.size()) {
        throw ShapeError("loss_bi team count mismatch: " + std::to_string(i_pred.size()) + " vs " +
                         std::to_string(i_b.size()));
    }
    double total = 0.0;
    for (std::size_t j = 0; j < i_pred.size(); ++j) {
        if (!i_pred[j].same_shape(i_b[j])) {
            throw ShapeError("loss_bi shape mismatch for team " + std::to_string(j) + ": " +
                             Tensor::shape_string(i_pred[j].shape()) + " vs " +
                             Tensor::shape_string(i_b[j].shape()));
        }
        total += frobenius_norm(sub(i_pred[j], i_b[j]));
    }
    return total;
}

inline Var loss_bi_g(Graph& g, const std::vector<Var>& i_pred, const std::vector<Tensor>& i_b) {
    Var total = g.input(Tensor::scalar(0.0));
    for (std::size_t j = 0; j < i_pred.size(); ++j) {
        Var diff = g.sub(i_pred[j], g.input(i_b[j]));
        total = g.add(total, g.sqrt(g.add_scalar(g.sum_all(g.square(diff)), 1e-24)));
    }
    return total;
}

}  // namespace tactictraj
