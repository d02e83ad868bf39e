#pragma once

#include <string>
#include <vector>

#include "tactictraj/config.hpp"
#include "tactictraj/layers.hpp"
#include "tactictraj/scene.hpp"

namespace tactictraj {

/// Per-agent condition vectors G with the trajectory slice in the first D_A
/// columns and the tactic slice in the last D_C columns.
struct ConditionSet {
    Tensor g;                          // N x (D_A + D_C)
    std::vector<bool> tactic_informed;  // per agent
    std::size_t d_a = 0;
    std::size_t d_c = 0;
};

/// Row l of the tactic embedding matrix W (V x D_C).
inline Tensor lookup_tactic(const Tensor& embedding, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= embedding.rows()) {
        throw VocabularyError("tactic label " + std::to_string(label) +
                              " outside embedding with " + std::to_string(embedding.rows()) +
                              " rows");
    }
    Tensor out({1, embedding.cols()});
    for (std::size_t j = 0; j < embedding.cols(); ++j)
        out.at(0, j) = embedding.at(static_cast<std::size_t>(label), j);
    return out;
}

/// Expand per-team tactic embeddings to one row per agent; the ball row is
/// all-zero (the ball belongs to no team).
inline Tensor expand_to_scene(const std::vector<Tensor>& team_embeddings,
                              const std::vector<int>& team_of) {
    if (team_embeddings.empty()) throw ArgumentError("no team embeddings");
    const std::size_t d_c = team_embeddings[0].cols();
    Tensor out({team_of.size(), d_c});
    for (std::size_t i = 0; i < team_of.size(); ++i) {
        if (team_of[i] == kBallTeam) continue;
        if (team_of[i] < 0 || static_cast<std::size_t>(team_of[i]) >= team_embeddings.size()) {
            throw DataError("agent " + std::to_string(i) + " maps to team " +
                            std::to_string(team_of[i]) + " without an embedding");
        }
        const Tensor& c = team_embeddings[static_cast<std::size_t>(team_of[i])];
        for (std::size_t j = 0; j < d_c; ++j) out.at(i, j) = c.at(0, j);
    }
    return out;
}

/// g_i = [a_i ; c_{i,m(i)}] with all agents marked tactic-informed.
inline ConditionSet build_condition(const Tensor& agent_embeddings, const Tensor& expanded_tactics) {
    if (agent_embeddings.rows() != expanded_tactics.rows()) {
        throw ShapeError("condition row mismatch " +
                         Tensor::shape_string(agent_embeddings.shape()) + " vs " +
                         Tensor::shape_string(expanded_tactics.shape()));
    }
    ConditionSet cs;
    cs.d_a = agent_embeddings.cols();
    cs.d_c = expanded_tactics.cols();
    cs.g = Tensor({agent_embeddings.rows(), cs.d_a + cs.d_c});
    for (std::size_t i = 0; i < agent_embeddings.rows(); ++i) {
        for (std::size_t j = 0; j < cs.d_a; ++j) cs.g.at(i, j) = agent_embeddings.at(i, j);
        for (std::size_t j = 0; j < cs.d_c; ++j)
            cs.g.at(i, cs.d_a + j) = expanded_tactics.at(i, j);
    }
    cs.tactic_informed.assign(agent_embeddings.rows(), true);
    return cs;
}

/// Scene-level classifier-free condition dropout: with probability p_drop the
/// tactic slice of every agent is zeroed and all flags cleared.
inline ConditionSet drop_condition(const ConditionSet& cs, SeededRng& rng, double p_drop) {
    if (!(p_drop >= 0.0 && p_drop <= 1.0)) {
        throw ArgumentError("p_drop must lie in [0, 1], got " + std::to_string(p_drop));
    }
    if (p_drop == 0.0 || !rng.bernoulli(p_drop)) return cs;
    ConditionSet out = cs;
    for (std::size_t i = 0; i < out.g.rows(); ++i)
        for (std::size_t j = out.d_a; j < out.g.cols(); ++j) out.g.at(i, j) = 0.0;
    out.tactic_informed.assign(out.g.rows(), false);
    return out;
}

/// Zero the tactic slice unconditionally (the unconditional CFG branch).
inline Tensor traj_only_condition(const Tensor& g, std::size_t d_a) {
    Tensor out = g;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = d_a; j < out.cols(); ++j) out.at(i, j) = 0.0;
    return out;
}

// ---- parameter init --------------------------------------------------------

inline void init_encoder_params(ParamStore& ps, const ModelConfig& cfg, const DatasetConfig& data,
                                SeededRng& rng) {
    init_linear(ps, "enc.in", 2, cfg.d_model, rng);
    for (std::size_t l = 0; l < cfg.enc_layers; ++l) {
        init_encoder_block(ps, "enc.blk" + std::to_string(l),
                           {cfg.d_model, cfg.enc_heads, 2 * cfg.d_model}, rng);
    }
    init_linear(ps, "enc.out", cfg.d_model, cfg.d_a, rng);
    ps.add("emb.tactic", xavier_uniform(data.vocab_size, cfg.d_c, rng, 2.0));
}

// ---- graph forward ---------------------------------------------------------

/// Trajectory embeddings A (N x D_A) from the observed window of a normalized
/// scene. Attention runs over time within each agent; agents never mix here.
inline Var embed_trajectories_g(Graph& g, ParamStore& ps, const ModelConfig& cfg,
                                const Scene& scene_norm) {
    if (scene_norm.t_obs == 0) throw ShapeError("scene has no observed frames");
    const Tensor pos_table = sinusoidal_positions(scene_norm.t_obs, cfg.d_model);
    std::vector<Var> rows;
    rows.reserve(scene_norm.n_agents());
    for (std::size_t i = 0; i < scene_norm.n_agents(); ++i) {
        Tensor obs({scene_norm.t_obs, 2});
        for (std::size_t f = 0; f < scene_norm.t_obs; ++f) {
            obs.at(f, 0) = scene_norm.x(i, f);
            obs.at(f, 1) = scene_norm.y(i, f);
        }
        Var x = g.add(linear_apply(g, ps, "enc.in", g.input(obs)), g.input(pos_table));
        for (std::size_t l = 0; l < cfg.enc_layers; ++l) {
            x = encoder_block_apply(g, ps, "enc.blk" + std::to_string(l),
                                    {cfg.d_model, cfg.enc_heads, 2 * cfg.d_model}, x);
        }
        Var projected = linear_apply(g, ps, "enc.out", x);
        Var pooled = cfg.temporal_pool == "last"
                         ? g.slice_rows(projected, scene_norm.t_obs - 1, scene_norm.t_obs)
                         : g.mean_rows(projected);
        rows.push_back(pooled);
    }
    return g.concat_rows(rows);
}

/// Expanded tactic-embedding rows C_e (N x D_C) for the observed labels.
inline Var expand_tactics_g(Graph& g, ParamStore& ps, const ModelConfig& cfg, const Scene& scene) {
    std::vector<Var> rows;
    rows.reserve(scene.n_agents());
    const Tensor& emb = ps.param("emb.tactic");
    for (std::size_t i = 0; i < scene.n_agents(); ++i) {
        if (scene.team_of[i] == kBallTeam) {
            rows.push_back(g.input(Tensor({1, cfg.d_c})));
            continue;
        }
        const int label = scene.tactics_of(scene.team_of[i]).observed;
        if (label < 0 || static_cast<std::size_t>(label) >= emb.rows()) {
            throw VocabularyError("observed tactic label " + std::to_string(label) +
                                  " outside vocabulary");
        }
        rows.push_back(g.gather_rows(g.param(ps, "emb.tactic"),
                                     {static_cast<std::size_t>(label)}));
    }
    return g.concat_rows(rows);
}

/// Full condition G = [A ; C_e] on the tape.
inline Var build_condition_g(Graph& g, Var agent_embeddings, Var expanded_tactics) {
    return g.concat_cols(agent_embeddings, expanded_tactics);
}

/// Unconditional branch: tactic slice replaced by zeros, same width.
inline Var traj_only_condition_g(Graph& g, Var agent_embeddings, std::size_t d_c) {
    const std::size_t n = g.value(agent_embeddings).rows();
    return g.concat_cols(agent_embeddings, g.input(Tensor({n, d_c})));
}

// ---- plain wrappers (forward-only) ------------------------------------------

inline Tensor embed_trajectories(ParamStore& ps, const ModelConfig& cfg, const Scene& scene_norm) {
    Graph g;
    return g.value(embed_trajectories_g(g, ps, cfg, scene_norm));
}

inline ConditionSet encode_condition(ParamStore& ps, const ModelConfig& cfg,
                                     const Scene& scene_norm) {
    Graph g;
    Var a = embed_trajectories_g(g, ps, cfg, scene_norm);
    Var c = expand_tactics_g(g, ps, cfg, scene_norm);
    ConditionSet cs;
    cs.d_a = cfg.d_a;
    cs.d_c = cfg.d_c;
    cs.g = g.value(build_condition_g(g, a, c));
    cs.tactic_informed.assign(scene_norm.n_agents(), true);
    return cs;
}

}  // namespace tactictraj
