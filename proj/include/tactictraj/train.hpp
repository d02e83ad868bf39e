#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tactictraj/metrics.hpp"
#include "tactictraj/model.hpp"

namespace tactictraj {

/// Training schedule and loss weights. alpha_w is the tactic-branch weight
/// (the paper's "tactic prediction rate" statement has no defined referent;
/// the default stays 1.0 and the CLI --help surfaces the ambiguity).
struct TrainConfig {
    std::size_t epochs_denoiser = 100;
    std::size_t epochs_tactic = 100;
    std::size_t epochs_banzhaf = 40;  // learner pretraining on frozen oracle targets
    std::size_t epochs_joint = 30;
    double lr_denoiser = 1e-3;
    double lr_tactic = 1e-3;
    double lr_banzhaf = 1e-3;
    double lr_joint = 2e-3;
    std::size_t lr_halve_every = 16;   // pretrain stages
    double joint_decay = 0.9;
    std::size_t joint_decay_every = 32;

    double eta = 1.0;       // uncertainty loss weight
    double alpha_w = 1.0;   // tactic branch weight
    double beta_w = 0.001;  // game factor

    std::size_t batch_size = 32;
    double grad_clip = 5.0;
    std::uint64_t seed = 12345;
    std::uint64_t model_init_seed = 1;

    std::size_t n_mask_samples = 16;
    double keep_prob_pretrain = 1.0;  // deterministic oracle targets
    double keep_prob_joint = 0.5;
    bool joint_from_scratch = false;
    std::size_t checkpoint_every = 0;  // extra per-epoch checkpoints; 0 = stage ends only

    json to_json() const {
        return json{{"epochs_denoiser", epochs_denoiser},
                    {"epochs_tactic", epochs_tactic},
                    {"epochs_banzhaf", epochs_banzhaf},
                    {"epochs_joint", epochs_joint},
                    {"lr_denoiser", lr_denoiser},
                    {"lr_tactic", lr_tactic},
                    {"lr_banzhaf", lr_banzhaf},
                    {"lr_joint", lr_joint},
                    {"lr_halve_every", lr_halve_every},
                    {"joint_decay", joint_decay},
                    {"joint_decay_every", joint_decay_every},
                    {"eta", eta},
                    {"alpha_w", alpha_w},
                    {"beta_w", beta_w},
                    {"batch_size", batch_size},
                    {"grad_clip", grad_clip},
                    {"seed", seed},
                    {"model_init_seed", model_init_seed},
                    {"n_mask_samples", n_mask_samples},
                    {"keep_prob_pretrain", keep_prob_pretrain},
                    {"keep_prob_joint", keep_prob_joint},
                    {"joint_from_scratch", joint_from_scratch},
                    {"checkpoint_every", checkpoint_every}};
    }

    static TrainConfig from_json(const json& j) {
        TrainConfig c;
        c.epochs_denoiser = j.value("epochs_denoiser", c.epochs_denoiser);
        c.epochs_tactic = j.value("epochs_tactic", c.epochs_tactic);
        c.epochs_banzhaf = j.value("epochs_banzhaf", c.epochs_banzhaf);
        c.epochs_joint = j.value("epochs_joint", c.epochs_joint);
        c.lr_denoiser = j.value("lr_denoiser", c.lr_denoiser);
        c.lr_tactic = j.value("lr_tactic", c.lr_tactic);
        c.lr_banzhaf = j.value("lr_banzhaf", c.lr_banzhaf);
        c.lr_joint = j.value("lr_joint", c.lr_joint);
        c.lr_halve_every = j.value("lr_halve_every", c.lr_halve_every);
        c.joint_decay = j.value("joint_decay", c.joint_decay);
        c.joint_decay_every = j.value("joint_decay_every", c.joint_decay_every);
        c.eta = j.value("eta", c.eta);
        c.alpha_w = j.value("alpha_w", c.alpha_w);
        c.beta_w = j.value("beta_w", c.beta_w);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.grad_clip = j.value("grad_clip", c.grad_clip);
        c.seed = j.value("seed", c.seed);
        c.model_init_seed = j.value("model_init_seed", c.model_init_seed);
        c.n_mask_samples = j.value("n_mask_samples", c.n_mask_samples);
        c.keep_prob_pretrain = j.value("keep_prob_pretrain", c.keep_prob_pretrain);
        c.keep_prob_joint = j.value("keep_prob_joint", c.keep_prob_joint);
        c.joint_from_scratch = j.value("joint_from_scratch", c.joint_from_scratch);
        c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
        return c;
    }
};

// ---- optimizer ----------------------------------------------------------------

struct AdamState {
    std::map<std::string, Tensor> m;
    std::map<std::string, Tensor> v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void reset() {
        m.clear();
        v.clear();
        step = 0;
    }
};

inline bool name_has_prefix(const std::string& name, const std::vector<std::string>& prefixes) {
    for (const auto& p : prefixes) {
        if (name.rfind(p, 0) == 0) return true;
    }
    return false;
}

/// Clip the global gradient norm over the trainable set, then apply Adam.
inline void adam_step(ParamStore& ps, AdamState& opt, double lr,
                      const std::vector<std::string>& trainable_prefixes, double grad_clip) {
    double norm2 = 0.0;
    for (const auto& [name, g] : ps.grads()) {
        if (!name_has_prefix(name, trainable_prefixes)) continue;
        for (double v : g.data()) norm2 += v * v;
    }
    const double norm = std::sqrt(norm2);
    const double clip_scale = (grad_clip > 0.0 && norm > grad_clip) ? grad_clip / norm : 1.0;

    ++opt.step;
    const double bc1 = 1.0 - std::pow(opt.beta1, opt.step);
    const double bc2 = 1.0 - std::pow(opt.beta2, opt.step);
    for (auto& [name, p] : ps.params()) {
        if (!name_has_prefix(name, trainable_prefixes)) continue;
        const Tensor& g = ps.grad(name);
        Tensor& m = opt.m.try_emplace(name, Tensor::zeros(p.shape())).first->second;
        Tensor& v = opt.v.try_emplace(name, Tensor::zeros(p.shape())).first->second;
        for (std::size_t i = 0; i < p.numel(); ++i) {
            const double gi = g[i] * clip_scale;
            m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * gi;
            v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * gi * gi;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + opt.eps);
        }
    }
}

// ---- per-scene loss graph -------------------------------------------------------

struct SceneLossValues {
    double noise = 0.0;
    double dist = 0.0;
    double unc = 0.0;
    double tactic = 0.0;
    double bi = 0.0;
    double total = 0.0;
};

struct LossOptions {
    bool trajectory = true;
    bool tactic = true;
    bool tactic_ce = true;   // focal classification term
    bool tactic_bi = true;   // learner-vs-oracle term
    bool encoder_on_tape = true;
    double eta = 1.0;
    double alpha_w = 1.0;
    double beta_w = 0.001;
    double keep_prob = 1.0;
    std::size_t n_mask_samples = 16;
    double loss_scale = 1.0;  // 1/batch for gradient averaging
    const FocalConfig* focal = nullptr;
};

namespace train_detail {

/// On-tape guided denoise chain from the initializer samples down to y_0.
inline Var denoise_chain_g(Model& m, Graph& g, Var y, Var cond, Var cond_u, SeededRng& rng) {
    const auto& sched = m.schedule;
    const std::size_t steps = m.cfg.denoise_steps_used;
    const double s_g = m.cfg.guide_scale;
    for (long t = static_cast<long>(steps) - 1; t >= 0; --t) {
        Var eps_c = m.denoiser_forward_g(g, y, cond, t + 1);
        Var eps = eps_c;
        if (s_g != 1.0) {
            Var eps_u = m.denoiser_forward_g(g, y, cond_u, t + 1);
            eps = g.add(eps_u, g.scale(g.sub(eps_c, eps_u), s_g));
        }
        const std::size_t ti = static_cast<std::size_t>(t);
        const double a = sched.alpha[ti];
        const double abar = sched.alpha_bar[ti];
        const double coef = abar < 1.0 ? (1.0 - a) / std::sqrt(1.0 - abar) : 0.0;
        y = g.scale(g.sub(y, g.scale(eps, coef)), 1.0 / std::sqrt(a));
        if (t > 0) {
            const double sigma = std::sqrt(1.0 - a);
            Tensor z = rng.gaussian_tensor(g.value(y).shape());
            y = g.add(y, g.input(scale(z, sigma)));
        }
    }
    return y;
}

/// Per-agent L2 norm averaged over agents: mean_i ||row_i||_2.
inline Var per_agent_norm_mean(Graph& g, Var x) {
    return g.mean_all(g.sqrt(g.add_scalar(g.sum_cols(g.square(x)), 1e-24)));
}

inline Var frob_norm_g(Graph& g, Var x) {
    return g.sqrt(g.add_scalar(g.sum_all(g.square(x)), 1e-24));
}

}  // namespace train_detail

/// Build every enabled loss for one scene on a single tape, backpropagate the
/// weighted total into the model's gradient slots, and report the values.
/// RNG consumption order is fixed: dropout flag, timestep, noise, chain noise,
/// oracle mask seeds.
inline SceneLossValues train_scene_step(Model& m, const Scene& scene_norm, SeededRng& rng,
                                        const LossOptions& opt) {
    Graph g;
    SceneLossValues out;

    Var a, cond;
    if (opt.encoder_on_tape) {
        a = embed_trajectories_g(g, m.params, m.cfg, scene_norm);
        Var c = expand_tactics_g(g, m.params, m.cfg, scene_norm);
        cond = build_condition_g(g, a, c);
    } else {
        Model::EncodedScene enc = m.encode(scene_norm);
        a = g.input(enc.agent_embeddings);
        cond = g.input(enc.cond);
    }
    Var cond_u = traj_only_condition_g(g, a, m.cfg.d_c);

    Var total = g.input(Tensor::scalar(0.0));

    if (opt.trajectory) {
        const Tensor y0 = m.relative_future(scene_norm);
        const bool dropped = rng.bernoulli(m.cfg.p_drop);
        const long t = static_cast<long>(rng.uniform_index(m.schedule.t_steps));
        const Tensor z = rng.gaussian_tensor(y0.shape());
        Var l_noise = m.loss_noise_g(g, dropped ? cond_u : cond, y0, t, z);
        out.noise = g.value(l_noise)[0];
        total = g.add(total, l_noise);

        auto init = m.init_samples_g(g, cond);
        std::vector<Var> preds = init.samples;
        if (m.cfg.dist_loss_target == "final") {
            for (auto& p : preds) p = train_detail::denoise_chain_g(m, g, p, cond, cond_u, rng);
        }
        Var truth = g.input(y0);
        std::vector<Var> errs;
        errs.reserve(preds.size());
        Var sum_err = g.input(Tensor::scalar(0.0));
        std::size_t argmin = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < preds.size(); ++s) {
            Var e = train_detail::frob_norm_g(g, g.sub(truth, preds[s]));
            errs.push_back(e);
            sum_err = g.add(sum_err, e);
            const double ev = g.value(e)[0];
            if (ev < best) {
                best = ev;
                argmin = s;
            }
        }
        Var l_dist = errs[argmin];
        Var inv_sigma2 = g.pow_const(init.sigma2, -1.0);
        Var l_unc = g.add(g.hadamard(g.scale(sum_err, 1.0 / static_cast<double>(preds.size())),
                                     inv_sigma2),
                          g.log(init.sigma2));
        out.dist = g.value(l_dist)[0];
        out.unc = g.value(l_unc)[0];
        total = g.add(total, g.add(l_dist, g.scale(l_unc, opt.eta)));
    }

    if (opt.tactic && opt.alpha_w != 0.0 && (opt.tactic_ce || opt.tactic_bi)) {
        auto branch = m.tactic_branch_g(g, a, cond, scene_norm);
        Var branch_loss = g.input(Tensor::scalar(0.0));
        if (opt.tactic_ce) {
            Var l_tactic = g.input(Tensor::scalar(0.0));
            for (std::size_t j = 0; j < m.data.m_teams; ++j) {
                const int truth_label = scene_norm.tactics_of(static_cast<int>(j)).future;
                FocalConfig fallback{Tensor(), 4.0};
                const FocalConfig& fc = opt.focal ? *opt.focal : fallback;
                l_tactic = g.add(l_tactic, focal_loss_g(g, branch.p_vars[j], truth_label, fc));
            }
            out.tactic = g.value(l_tactic)[0];
            branch_loss = g.add(branch_loss, l_tactic);
        }
        if (opt.tactic_bi) {
            std::vector<Tensor> targets;
            for (std::size_t j = 0; j < m.data.m_teams; ++j) {
                MaskSamplerConfig mask_cfg{opt.n_mask_samples, opt.keep_prob, rng.next_u64()};
                targets.push_back(m.oracle_targets(branch.forward.enhanced_tokens[j],
                                                   branch.forward.per_team[j].top_embeddings,
                                                   mask_cfg));
            }
            Var l_bi = loss_bi_g(g, branch.interaction_vars, targets);
            out.bi = g.value(l_bi)[0];
            branch_loss = g.add(branch_loss, g.scale(l_bi, opt.beta_w));
        }
        total = g.add(total, g.scale(branch_loss, opt.alpha_w));
    }

    out.total = g.value(total)[0];
    if (!std::isfinite(out.total)) {
        const char* term = !std::isfinite(out.noise)    ? "loss_noise"
                           : !std::isfinite(out.dist)   ? "loss_dist"
                           : !std::isfinite(out.unc)    ? "loss_unc"
                           : !std::isfinite(out.tactic) ? "loss_tactic"
                           : !std::isfinite(out.bi)     ? "loss_bi"
                                                        : "loss_total";
        throw NumericError(std::string("non-finite ") + term + " in scene " + scene_norm.scene_id);
    }
    if (opt.loss_scale != 1.0) total = g.scale(total, opt.loss_scale);
    g.backward(total);
    return out;
}

// ---- staged trainer ---------------------------------------------------------------

struct StageSpec {
    std::string name;
    std::size_t epochs = 0;
    double lr0 = 1e-3;
    bool halve_schedule = true;  // halve every lr_halve_every vs joint decay
    LossOptions losses;
    std::vector<std::string> trainable;
};

struct TrainState {
    std::size_t stage_index = 0;
    std::size_t epoch_in_stage = 0;  // epochs completed in the current stage
    bool finished = false;
};

struct EpochLog {
    std::string stage;
    std::size_t stage_index = 0;
    std::size_t epoch = 0;  // index within the stage, 0-based
    double lr = 0.0;
    std::map<std::string, double> losses;

    json to_json() const {
        return json{{"stage", stage}, {"stage_index", stage_index}, {"epoch", epoch},
                    {"lr", lr},       {"losses", losses}};
    }
};

using EpochCallback = std::function<void(const EpochLog&)>;
using CheckpointHook = std::function<void(const TrainState&, const AdamState&)>;

inline std::vector<StageSpec> build_stages(const Model& m, const TrainConfig& cfg,
                                           const FocalConfig* focal) {
    LossOptions traj_only;
    traj_only.trajectory = true;
    traj_only.tactic = false;
    traj_only.encoder_on_tape = true;
    traj_only.eta = cfg.eta;

    LossOptions tactic_only;
    tactic_only.trajectory = false;
    tactic_only.tactic = true;
    tactic_only.tactic_ce = true;
    tactic_only.tactic_bi = false;        // the learner gets its own stage
    tactic_only.encoder_on_tape = false;  // encoder frozen in the tactic stage
    tactic_only.alpha_w = cfg.alpha_w;
    tactic_only.beta_w = cfg.beta_w;
    tactic_only.keep_prob = cfg.keep_prob_pretrain;
    tactic_only.n_mask_samples = cfg.n_mask_samples;
    tactic_only.focal = focal;

    // Learner pretraining: everything else frozen, so the deterministic
    // (keep_probability = 1) oracle targets are stationary.
    LossOptions banzhaf_only = tactic_only;
    banzhaf_only.tactic_ce = false;
    banzhaf_only.tactic_bi = true;
    banzhaf_only.keep_prob = cfg.keep_prob_pretrain;
    banzhaf_only.n_mask_samples = 1;

    LossOptions joint;
    joint.trajectory = true;
    joint.tactic = true;
    joint.encoder_on_tape = true;
    joint.eta = cfg.eta;
    joint.alpha_w = cfg.alpha_w;
    joint.beta_w = cfg.beta_w;
    joint.keep_prob = cfg.keep_prob_joint;
    joint.n_mask_samples = cfg.n_mask_samples;
    joint.focal = focal;

    const std::vector<std::string> traj_params = {"enc.", "emb.", "den.", "init."};
    const std::vector<std::string> head_params = {"enh.", "head."};
    const std::vector<std::string> learner_params = {"lrn."};
    const std::vector<std::string> all_params = {"enc.", "emb.", "den.", "init.",
                                                 "enh.", "lrn.", "head."};

    std::vector<StageSpec> stages;
    if (cfg.joint_from_scratch) {
        stages.push_back({"joint", cfg.epochs_joint, cfg.lr_joint, false, joint, all_params});
        return stages;
    }
    stages.push_back({"denoiser", cfg.epochs_denoiser, cfg.lr_denoiser, true, traj_only,
                      traj_params});
    if (cfg.alpha_w != 0.0) {
        stages.push_back({"tactic", cfg.epochs_tactic, cfg.lr_tactic, true, tactic_only,
                          head_params});
    }
    stages.push_back({"joint", cfg.epochs_joint, cfg.lr_joint, false, joint, all_params});
    if (cfg.alpha_w != 0.0 && cfg.beta_w != 0.0) {
        // The learner's supervised fit runs last, against deterministic
        // targets from the settled model; it updates only lrn.* parameters.
        stages.push_back({"banzhaf", cfg.epochs_banzhaf, cfg.lr_banzhaf, true, banzhaf_only,
                          learner_params});
    }
    return stages;
}

/// Run the staged schedule. Scenes arrive in court coordinates and are
/// normalized once up front. Deterministic given (model, config) seeds.
inline TrainState train_model(Model& m, const std::vector<Scene>& train_scenes,
                              const TrainConfig& cfg, const EpochCallback& on_epoch,
                              const CheckpointHook& checkpoint_hook = nullptr,
                              const TrainState* resume = nullptr,
                              AdamState* resume_opt = nullptr) {
    if (train_scenes.empty()) throw ArgumentError("training needs a nonempty dataset");

    std::vector<Scene> scenes;
    scenes.reserve(train_scenes.size());
    for (const auto& s : train_scenes) scenes.push_back(normalize(s, m.norm));

    // Class weights from training-set future labels.
    std::vector<std::size_t> counts(m.data.vocab_size, 0);
    for (const auto& s : scenes)
        for (const auto& t : s.tactics) counts[static_cast<std::size_t>(t.future)]++;
    FocalConfig focal{class_weights_from_counts(counts), 4.0};

    auto stages = build_stages(m, cfg, &focal);

    TrainState state;
    AdamState opt;
    if (resume) {
        state = *resume;
        if (resume_opt) opt = *resume_opt;
    }

    SeededRng train_rng(cfg.seed);
    for (; state.stage_index < stages.size(); ++state.stage_index) {
        const StageSpec& stage = stages[state.stage_index];
        if (state.epoch_in_stage == 0 && !(resume && resume_opt &&
                                           state.stage_index == resume->stage_index)) {
            opt.reset();
        }
        for (std::size_t epoch = state.epoch_in_stage; epoch < stage.epochs; ++epoch) {
            double lr = stage.lr0;
            if (stage.halve_schedule) {
                lr *= std::pow(0.5, static_cast<double>(epoch / cfg.lr_halve_every));
            } else {
                lr *= std::pow(cfg.joint_decay, static_cast<double>(epoch / cfg.joint_decay_every));
            }

            // Deterministic epoch shuffle keyed by (stage, epoch).
            SeededRng shuffle_rng = train_rng.substream(
                (static_cast<std::uint64_t>(state.stage_index) << 32) ^ epoch ^ 0x5u);
            std::vector<std::size_t> order(scenes.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            shuffle_rng.shuffle(order);

            EpochLog log;
            log.stage = stage.name;
            log.stage_index = state.stage_index;
            log.epoch = epoch;
            log.lr = lr;
            std::map<std::string, double> sums;
            std::size_t n_seen = 0;

            for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
                const std::size_t end = std::min(order.size(), start + cfg.batch_size);
                m.params.zero_grads();
                LossOptions opt_scene = stage.losses;
                opt_scene.loss_scale = 1.0 / static_cast<double>(end - start);
                for (std::size_t b = start; b < end; ++b) {
                    SeededRng scene_rng = train_rng.substream(
                        (static_cast<std::uint64_t>(state.stage_index) << 48) ^
                        (static_cast<std::uint64_t>(epoch) << 24) ^ order[b] ^ 0x7EA1ULL);
                    SceneLossValues v =
                        train_scene_step(m, scenes[order[b]], scene_rng, opt_scene);
                    sums["noise"] += v.noise;
                    sums["dist"] += v.dist;
                    sums["unc"] += v.unc;
                    sums["tactic"] += v.tactic;
                    sums["bi"] += v.bi;
                    sums["total"] += v.total;
                    ++n_seen;
                }
                adam_step(m.params, opt, lr, stage.trainable, cfg.grad_clip);
            }

            for (auto& [k, v] : sums) v /= static_cast<double>(n_seen);
            log.losses = sums;
            state.epoch_in_stage = epoch + 1;
            if (on_epoch) on_epoch(log);
            const bool stage_end = epoch + 1 == stage.epochs;
            if (checkpoint_hook &&
                (stage_end || (cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0))) {
                checkpoint_hook(state, opt);
            }
        }
        state.epoch_in_stage = 0;
    }
    state.finished = true;
    return state;
}

}  // namespace tactictraj
