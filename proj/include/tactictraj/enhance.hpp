#pragma once

#include <vector>

#include "tactictraj/config.hpp"
#include "tactictraj/layers.hpp"
#include "tactictraj/scene.hpp"

namespace tactictraj {

/// Team token block: the team's players in agent-index order with the shared
/// ball token appended as the last row.
struct TeamTokens {
    int team = 0;
    std::vector<std::size_t> agent_indices;  // players..., ball
    Tensor tokens;                           // N_T x D_g
};

inline std::vector<std::size_t> team_token_indices(const Scene& scene, int team,
                                                   std::size_t n_team_tokens) {
    std::vector<std::size_t> idx = scene.team_members(team);
    bool has_ball = false;
    for (std::size_t i = 0; i < scene.n_agents(); ++i) {
        if (scene.team_of[i] == kBallTeam) {
            idx.push_back(i);
            has_ball = true;
            break;
        }
    }
    if (!has_ball) throw DataError("scene " + scene.scene_id + " has no ball agent");
    if (idx.size() != n_team_tokens) {
        throw DataError("scene " + scene.scene_id + ": team " + std::to_string(team) + " has " +
                        std::to_string(idx.size() - 1) + " players, expected " +
                        std::to_string(n_team_tokens - 1));
    }
    return idx;
}

/// Split scene-level tokens G into per-team blocks sharing the ball row.
inline std::vector<TeamTokens> split_teams(const Tensor& g, const Scene& scene,
                                           std::size_t m_teams, std::size_t n_team_tokens) {
    if (g.rows() != scene.n_agents()) {
        throw ShapeError("token rows " + std::to_string(g.rows()) + " vs scene agents " +
                         std::to_string(scene.n_agents()));
    }
    std::vector<TeamTokens> out;
    for (std::size_t j = 0; j < m_teams; ++j) {
        TeamTokens tt;
        tt.team = static_cast<int>(j);
        tt.agent_indices = team_token_indices(scene, tt.team, n_team_tokens);
        tt.tokens = Tensor({n_team_tokens, g.cols()});
        for (std::size_t r = 0; r < n_team_tokens; ++r)
            for (std::size_t c = 0; c < g.cols(); ++c)
                tt.tokens.at(r, c) = g.at(tt.agent_indices[r], c);
        out.push_back(std::move(tt));
    }
    return out;
}

inline void init_enhance_params(ParamStore& ps, const ModelConfig& cfg, SeededRng& rng) {
    const std::size_t d_g = cfg.d_g();
    ps.add("enh.gq", xavier_uniform(d_g, cfg.enh_d_k, rng));
    ps.add("enh.gk", xavier_uniform(d_g, cfg.enh_d_k, rng));
    ps.add("enh.gv", xavier_uniform(d_g, d_g, rng));  // value path keeps width D_g
    ps.add("enh.lq", xavier_uniform(d_g, cfg.enh_d_k, rng));
    ps.add("enh.lk", xavier_uniform(d_g, cfg.enh_d_k, rng));
    ps.add("enh.lv", xavier_uniform(d_g, cfg.enh_d_k, rng));
    ps.add("enh.fuse", xavier_uniform(cfg.enh_d_k, d_g, rng));
}

/// Global stage: queries from the team block, keys/values from the whole
/// scene token set. Scoring at width D_k, value path width-preserving.
inline Var global_attend_g(Graph& g, ParamStore& ps, Var team_tokens, Var scene_tokens) {
    Var q = g.matmul(team_tokens, g.param(ps, "enh.gq"));
    Var k = g.matmul(scene_tokens, g.param(ps, "enh.gk"));
    Var v = g.matmul(scene_tokens, g.param(ps, "enh.gv"));
    return attention_apply(g, q, k, v);
}

/// Local stage: queries from the global output, single key/value from the
/// ball token. With one key the softmax weight is exactly 1 per query row.
inline Var local_attend_g(Graph& g, ParamStore& ps, Var global_tokens, Var ball_token) {
    Var q = g.matmul(global_tokens, g.param(ps, "enh.lq"));
    Var k = g.matmul(ball_token, g.param(ps, "enh.lk"));
    Var v = g.matmul(ball_token, g.param(ps, "enh.lv"));
    return attention_apply(g, q, k, v);
}

/// Residual fusion: Ghat_j = G'_j + proj(local value).
inline Var fuse_g(Graph& g, ParamStore& ps, Var global_tokens, Var local_value) {
    return g.add(global_tokens, g.matmul(local_value, g.param(ps, "enh.fuse")));
}

/// Full enhancement of one team block against the scene token set.
inline Var enhance_team_g(Graph& g, ParamStore& ps, Var team_tokens, Var scene_tokens) {
    Var global = global_attend_g(g, ps, team_tokens, scene_tokens);
    const std::size_t n_t = g.value(team_tokens).rows();
    Var ball = g.slice_rows(team_tokens, n_t - 1, n_t);
    Var local = local_attend_g(g, ps, global, ball);
    return fuse_g(g, ps, global, local);
}

// ---- plain wrappers ---------------------------------------------------------

inline Tensor global_attend(ParamStore& ps, const Tensor& team_tokens,
                            const Tensor& scene_tokens) {
    Graph g;
    return g.value(global_attend_g(g, ps, g.input(team_tokens), g.input(scene_tokens)));
}

inline Tensor local_attend(ParamStore& ps, const Tensor& global_tokens, const Tensor& ball_token) {
    Graph g;
    return g.value(local_attend_g(g, ps, g.input(global_tokens), g.input(ball_token)));
}

inline Tensor fuse(ParamStore& ps, const Tensor& global_tokens, const Tensor& local_value) {
    Graph g;
    return g.value(fuse_g(g, ps, g.input(global_tokens), g.input(local_value)));
}

inline Tensor enhance_team(ParamStore& ps, const Tensor& team_tokens,
                           const Tensor& scene_tokens) {
    Graph g;
    return g.value(enhance_team_g(g, ps, g.input(team_tokens), g.input(scene_tokens)));
}

}  // namespace tactictraj
