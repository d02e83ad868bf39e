#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tactictraj/coop_game.hpp"
#include "tactictraj/diffusion.hpp"
#include "tactictraj/encoder.hpp"
#include "tactictraj/enhance.hpp"
#include "tactictraj/learner.hpp"
#include "tactictraj/tactic_head.hpp"

namespace tactictraj {

/// The full two-branch model: one ParamStore holding every sub-model under a
/// name prefix, plus the frozen similarity projection used by the oracle.
struct Model {
    DatasetConfig data;
    ModelConfig cfg;
    TacticVocabulary vocab;
    NormalizationParams norm;
    NoiseSchedule schedule;
    ParamStore params;

    std::size_t future_dim() const { return data.t_pred * 2; }

    static Model create(const DatasetConfig& data, const ModelConfig& cfg,
                        const TacticVocabulary& vocab, const NormalizationParams& norm,
                        std::uint64_t seed) {
        data.validate();
        cfg.validate(data);
        vocab.validate();
        if (vocab.size() != data.vocab_size) {
            throw ConfigError("vocabulary size " + std::to_string(vocab.size()) +
                              " does not match dataset config V=" +
                              std::to_string(data.vocab_size));
        }
        Model m{data, cfg, vocab, norm, NoiseSchedule::linear(cfg.t_steps, cfg.beta_min, cfg.beta_max),
                ParamStore{}};
        SeededRng rng(seed);
        init_encoder_params(m.params, cfg, data, rng);
        init_denoiser_params(m.params, cfg, data, rng);
        init_initializer_params(m.params, cfg, data, rng);
        init_enhance_params(m.params, cfg, rng);
        init_learner_params(m.params, cfg, rng);
        init_head_params(m.params, cfg, data, rng);
        // Frozen random projections for the oracle similarity.
        m.params.add("sim.agent", xavier_uniform(cfg.d_g(), cfg.sim_d_s, rng, cfg.sim_gain));
        m.params.add("sim.tactic", xavier_uniform(cfg.d_c, cfg.sim_d_s, rng, cfg.sim_gain));
        return m;
    }

    // ---- denoiser -----------------------------------------------------------

    static void init_denoiser_params(ParamStore& ps, const ModelConfig& cfg,
                                     const DatasetConfig& data, SeededRng& rng) {
        const std::size_t f = data.t_pred * 2;
        init_linear(ps, "den.in_y", f, cfg.den_width, rng);
        init_linear(ps, "den.in_g", cfg.d_g(), cfg.den_width, rng);
        init_mlp(ps, "den.temb", {{cfg.den_width, cfg.den_width, cfg.den_width}}, rng);
        for (std::size_t l = 0; l < cfg.den_blocks; ++l) {
            init_encoder_block(ps, "den.blk" + std::to_string(l),
                               {cfg.den_width, cfg.den_heads, 2 * cfg.den_width}, rng);
        }
        init_linear(ps, "den.out", cfg.den_width, f, rng);
    }

    /// f_eps(y, cond, t): per-agent tokens mixed by cross-agent attention.
    Var denoiser_forward_g(Graph& g, Var y, Var cond, long t) {
        Var tok = g.add(linear_apply(g, params, "den.in_y", y),
                        linear_apply(g, params, "den.in_g", cond));
        Var temb = mlp_apply(g, params, "den.temb",
                             {{cfg.den_width, cfg.den_width, cfg.den_width}},
                             g.input(sinusoidal_scalar(static_cast<double>(t), cfg.den_width)));
        tok = g.add_rowvec(tok, temb);
        for (std::size_t l = 0; l < cfg.den_blocks; ++l) {
            tok = encoder_block_apply(g, params, "den.blk" + std::to_string(l),
                                      {cfg.den_width, cfg.den_heads, 2 * cfg.den_width}, tok);
        }
        return linear_apply(g, params, "den.out", tok);
    }

    Tensor denoiser_forward(const Tensor& y, const Tensor& cond, long t) {
        Graph g;
        return g.value(denoiser_forward_g(g, g.input(y), g.input(cond), t));
    }

    NoiseEstimator noise_estimator() {
        return [this](const Tensor& y, const Tensor& cond, long t) {
            return denoiser_forward(y, cond, t);
        };
    }

    // ---- leapfrog initializer -------------------------------------------------

    static void init_initializer_params(ParamStore& ps, const ModelConfig& cfg,
                                        const DatasetConfig& data, SeededRng& rng) {
        const std::size_t f = data.t_pred * 2;
        init_mlp(ps, "init.trunk", {{cfg.d_g(), cfg.init_hidden, cfg.init_hidden}}, rng);
        init_linear(ps, "init.mu", cfg.init_hidden, f, rng);
        init_linear(ps, "init.logvar", cfg.init_hidden, 1, rng);
        init_linear(ps, "init.off", cfg.init_hidden, cfg.n_samples * f, rng);
    }

    struct InitSamplesG {
        std::vector<Var> samples;  // S entries, each N x F
        Var sigma2;                // 1 x 1 scene-level variance
    };

    /// samples_s = mu + sigma_agent * (offset_s - mean_s offset); sigma2 is the
    /// scene-level mean of per-agent variances used by L_unc.
    InitSamplesG init_samples_g(Graph& g, Var cond) {
        const std::size_t f = future_dim();
        const std::size_t s_count = cfg.n_samples;
        Var trunk = g.relu(mlp_apply(g, params, "init.trunk",
                                     {{cfg.d_g(), cfg.init_hidden, cfg.init_hidden}}, cond));
        Var mu = linear_apply(g, params, "init.mu", trunk);
        Var logvar = linear_apply(g, params, "init.logvar", trunk);
        Var offsets = linear_apply(g, params, "init.off", trunk);
        Var sigma_col = g.exp(g.scale(logvar, 0.5));
        InitSamplesG out;
        out.sigma2 = g.mean_all(g.exp(logvar));
        std::vector<Var> slices;
        slices.reserve(s_count);
        Var mean_off = g.slice_cols(offsets, 0, f);
        slices.push_back(mean_off);
        for (std::size_t s = 1; s < s_count; ++s) {
            Var sl = g.slice_cols(offsets, s * f, (s + 1) * f);
            slices.push_back(sl);
            mean_off = g.add(mean_off, sl);
        }
        mean_off = g.scale(mean_off, 1.0 / static_cast<double>(s_count));
        for (std::size_t s = 0; s < s_count; ++s) {
            Var centered = g.sub(slices[s], mean_off);
            out.samples.push_back(g.add(mu, g.mul_colvec(centered, sigma_col)));
        }
        return out;
    }

    /// Plain init_samples: S starting trajectories and sigma_theta.
    std::pair<std::vector<Tensor>, double> init_samples(const Tensor& cond) {
        Graph g;
        auto got = init_samples_g(g, g.input(cond));
        std::vector<Tensor> samples;
        samples.reserve(got.samples.size());
        for (Var v : got.samples) samples.push_back(g.value(v));
        return {samples, std::sqrt(g.value(got.sigma2)[0])};
    }

    /// Eq.-style noise matching loss: mean over agents of ||z_i - eps_i||_2,
    /// with y_t formed from (y0, t, z) by the closed-form marginal.
    Var loss_noise_g(Graph& g, Var cond, const Tensor& y0, long t, const Tensor& z) {
        const Tensor y_t = forward_diffuse_with_noise(y0, t, schedule, z);
        Var eps = denoiser_forward_g(g, g.input(y_t), cond, t);
        Var diff = g.sub(g.input(z), eps);
        return g.mean_all(g.sqrt(g.add_scalar(g.sum_cols(g.square(diff)), 1e-24)));
    }

    // ---- condition encoding ---------------------------------------------------

    struct EncodedScene {
        Tensor agent_embeddings;  // N x D_A
        Tensor cond;              // N x D_g (tactic-informed)
        Tensor cond_traj_only;    // N x D_g (tactic slice zeroed)
    };

    EncodedScene encode(const Scene& scene_norm) {
        Graph g;
        Var a = embed_trajectories_g(g, params, cfg, scene_norm);
        Var c = expand_tactics_g(g, params, cfg, scene_norm);
        Var cond = build_condition_g(g, a, c);
        EncodedScene out;
        out.agent_embeddings = g.value(a);
        out.cond = g.value(cond);
        out.cond_traj_only = traj_only_condition(out.cond, cfg.d_a);
        return out;
    }

    // ---- sampling ---------------------------------------------------------------

    /// Relative normalized future targets: row per agent, flattened (t, xy).
    Tensor relative_future(const Scene& scene_norm) const {
        Tensor y0({scene_norm.n_agents(), future_dim()});
        for (std::size_t i = 0; i < scene_norm.n_agents(); ++i) {
            const double lx = scene_norm.x(i, data.t_obs - 1);
            const double ly = scene_norm.y(i, data.t_obs - 1);
            for (std::size_t t = 0; t < data.t_pred; ++t) {
                y0.at(i, 2 * t) = scene_norm.x(i, data.t_obs + t) - lx;
                y0.at(i, 2 * t + 1) = scene_norm.y(i, data.t_obs + t) - ly;
            }
        }
        return y0;
    }

    /// Sample S future trajectories for a court-coordinate scene; the output
    /// is denormalized back to court meters, shape [S, N, T_pred, 2].
    Tensor sample_trajectories(const Scene& scene, SeededRng& rng) {
        if (cfg.denoise_steps_used < 1) throw ArgumentError("denoise_steps_used must be >= 1");
        const Scene scene_norm = normalize(scene, norm);
        EncodedScene enc = encode(scene_norm);
        return sample_from_condition(scene_norm, enc, rng);
    }

    Tensor sample_from_condition(const Scene& scene_norm, const EncodedScene& enc,
                                 SeededRng& rng) {
        const std::size_t n = scene_norm.n_agents();
        const std::size_t f = future_dim();
        const std::size_t s_count = cfg.n_samples;
        const std::size_t steps = cfg.ancestral_sampling ? cfg.t_steps : cfg.denoise_steps_used;

        std::vector<Tensor> starts;
        if (cfg.ancestral_sampling) {
            for (std::size_t s = 0; s < s_count; ++s) {
                SeededRng sub = rng.substream(0xA11CE000ULL + s);
                starts.push_back(sub.gaussian_tensor({n, f}));
            }
        } else {
            starts = init_samples(enc.cond).first;
        }

        auto estimator = noise_estimator();
        Tensor out({s_count, n, data.t_pred, 2});
        for (std::size_t s = 0; s < s_count; ++s) {
            SeededRng sub = rng.substream(0xD40153ULL + s);
            Tensor y = starts[s];
            for (long t = static_cast<long>(steps) - 1; t >= 0; --t) {
                Tensor eps = guided_noise(estimator, y, enc.cond, enc.cond_traj_only, t + 1,
                                          cfg.guide_scale);
                y = denoise_step(y, eps, t, schedule, sub);
            }
            // Denormalize: add last observed position, undo scaling.
            for (std::size_t i = 0; i < n; ++i) {
                const double lx = scene_norm.x(i, data.t_obs - 1);
                const double ly = scene_norm.y(i, data.t_obs - 1);
                for (std::size_t t = 0; t < data.t_pred; ++t) {
                    out[out.offset({s, i, t, 0})] =
                        (y.at(i, 2 * t) + lx) * norm.scale + norm.center[0];
                    out[out.offset({s, i, t, 1})] =
                        (y.at(i, 2 * t + 1) + ly) * norm.scale + norm.center[1];
                }
            }
        }
        return out;
    }

    // ---- tactic branch ----------------------------------------------------------

    struct TacticForward {
        std::vector<TacticPrediction> per_team;  // indexed by team id
        std::vector<Tensor>
            interaction_pred;  // per team N_T x k (row-stochastic, learner output)
        std::vector<Tensor> enhanced_tokens;  // per team N_T x D_g
    };

    /// Forward-only tactic branch from a court-coordinate scene.
    TacticForward predict_tactics_forward(const Scene& scene) {
        const Scene scene_norm = normalize(scene, norm);
        EncodedScene enc = encode(scene_norm);
        Graph g;
        Var a = g.input(enc.agent_embeddings);
        Var cond = g.input(enc.cond);
        return tactic_branch_g(g, a, cond, scene_norm).forward;
    }

    struct TacticBranchG {
        TacticForward forward;
        std::vector<Var> p_vars;            // per team 1 x V
        std::vector<Var> interaction_vars;  // per team N_T x k
        std::vector<Var> enhanced_vars;     // per team N_T x D_g
    };

    /// Tactic branch on the tape. `a` and `cond` may be params-backed vars
    /// (joint training) or plain inputs (frozen encoder).
    TacticBranchG tactic_branch_g(Graph& g, Var a, Var cond, const Scene& scene_norm) {
        TacticBranchG out;
        Var i_scene = predict_interaction_scene_g(g, params, cfg, a);
        for (std::size_t j = 0; j < data.m_teams; ++j) {
            const auto idx = team_token_indices(scene_norm, static_cast<int>(j), data.n_team_tokens);
            Var team_tokens = g.gather_rows(cond, idx);
            Var enhanced = enhance_team_g(g, params, team_tokens, cond);
            Var i_team = g.gather_rows(i_scene, idx);
            Var weighted = fuse_weighted_g(g, enhanced, i_team);
            Var p = predict_tactics_g(g, params, cfg, data.vocab_size, weighted);

            TacticPrediction pred;
            pred.probabilities = g.value(p);
            auto [labels, embeddings] =
                topk_extract(pred.probabilities, params.param("emb.tactic"), cfg.k_top);
            pred.top_labels = labels;
            pred.top_embeddings = embeddings;

            out.forward.per_team.push_back(std::move(pred));
            out.forward.interaction_pred.push_back(g.value(i_team));
            out.forward.enhanced_tokens.push_back(g.value(enhanced));
            out.p_vars.push_back(p);
            out.interaction_vars.push_back(i_team);
            out.enhanced_vars.push_back(enhanced);
        }
        return out;
    }

    /// Oracle interaction targets for one team: masked-similarity I_B computed
    /// from detached values (never on the tape).
    Tensor oracle_targets(const Tensor& enhanced_tokens, const Tensor& top_embeddings,
                          const MaskSamplerConfig& mask_cfg) {
        Tensor s = similarity_logits(enhanced_tokens, top_embeddings, params.param("sim.agent"),
                                     params.param("sim.tactic"));
        return masked_interaction(s, mask_cfg).i_b;
    }
};

}  // namespace tactictraj
