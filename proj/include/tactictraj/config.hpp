#pragma once

#include <string>

#include <json.hpp>

#include "tactictraj/errors.hpp"
#include "tactictraj/scene.hpp"

namespace tactictraj {

/// Model architecture and sampler settings. Defaults follow the desk-scale
/// sizing used throughout; every width is configurable from the train config.
struct ModelConfig {
    // Trajectory transformer (per-agent, over observed frames).
    std::size_t d_model = 128;
    std::size_t enc_layers = 2;
    std::size_t enc_heads = 4;
    std::size_t d_a = 128;  // trajectory embedding width
    std::size_t d_c = 32;   // tactic embedding width

    // Denoiser f_eps: cross-agent attention over per-agent tokens.
    std::size_t den_width = 128;
    std::size_t den_blocks = 2;
    std::size_t den_heads = 4;

    // Leapfrog initializer.
    std::size_t init_hidden = 128;
    std::size_t n_samples = 20;  // S

    // Multi-grained enhancement (scoring dim; value path stays at d_g).
    std::size_t enh_d_k = 64;

    // Banzhaf learner.
    std::size_t lrn_hidden = 64;  // D_h
    std::size_t k_top = 5;

    // Tactic head.
    std::size_t head_hidden = 128;

    // Similarity projection for the oracle interaction targets (frozen).
    std::size_t sim_d_s = 32;
    double sim_gain = 1.0;  // init gain; larger values sharpen oracle softmaxes

    // Diffusion schedule and guidance.
    std::size_t t_steps = 100;
    double beta_min = 1e-4;
    double beta_max = 0.05;
    double guide_scale = 0.1;          // s_g
    std::size_t denoise_steps_used = 5;  // leapfrog skip: initializer targets tau+1
    bool ancestral_sampling = false;     // full T-step sampling from pure noise
    double p_drop = 0.1;                 // scene-level condition dropout

    // Pooling of the per-agent transformer over time.
    std::string temporal_pool = "mean";  // "mean" | "last"

    // Where L_dist / L_unc attach: "final" (denoised output) or "initializer".
    std::string dist_loss_target = "final";

    std::size_t d_g() const { return d_a + d_c; }

    void validate(const DatasetConfig& data) const {
        if (d_model % enc_heads != 0 || den_width % den_heads != 0) {
            throw ConfigError("attention width must divide heads");
        }
        if (denoise_steps_used < 1 || denoise_steps_used > t_steps) {
            throw ConfigError("denoise_steps_used must lie in [1, t_steps]");
        }
        if (k_top < 1 || k_top > data.vocab_size) {
            throw ConfigError("k_top must lie in [1, vocab_size]");
        }
        if (temporal_pool != "mean" && temporal_pool != "last") {
            throw ConfigError("temporal_pool must be 'mean' or 'last'");
        }
        if (dist_loss_target != "final" && dist_loss_target != "initializer") {
            throw ConfigError("dist_loss_target must be 'final' or 'initializer'");
        }
        if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
    }

    json to_json() const {
        return json{{"d_model", d_model},
                    {"enc_layers", enc_layers},
                    {"enc_heads", enc_heads},
                    {"d_a", d_a},
                    {"d_c", d_c},
                    {"den_width", den_width},
                    {"den_blocks", den_blocks},
                    {"den_heads", den_heads},
                    {"init_hidden", init_hidden},
                    {"n_samples", n_samples},
                    {"enh_d_k", enh_d_k},
                    {"lrn_hidden", lrn_hidden},
                    {"k_top", k_top},
                    {"head_hidden", head_hidden},
                    {"sim_d_s", sim_d_s},
                    {"sim_gain", sim_gain},
                    {"t_steps", t_steps},
                    {"beta_min", beta_min},
                    {"beta_max", beta_max},
                    {"guide_scale", guide_scale},
                    {"denoise_steps_used", denoise_steps_used},
                    {"ancestral_sampling", ancestral_sampling},
                    {"p_drop", p_drop},
                    {"temporal_pool", temporal_pool},
                    {"dist_loss_target", dist_loss_target}};
    }

    static ModelConfig from_json(const json& j) {
        ModelConfig c;
        c.d_model = j.value("d_model", c.d_model);
        c.enc_layers = j.value("enc_layers", c.enc_layers);
        c.enc_heads = j.value("enc_heads", c.enc_heads);
        c.d_a = j.value("d_a", c.d_a);
        c.d_c = j.value("d_c", c.d_c);
        c.den_width = j.value("den_width", c.den_width);
        c.den_blocks = j.value("den_blocks", c.den_blocks);
        c.den_heads = j.value("den_heads", c.den_heads);
        c.init_hidden = j.value("init_hidden", c.init_hidden);
        c.n_samples = j.value("n_samples", c.n_samples);
        c.enh_d_k = j.value("enh_d_k", c.enh_d_k);
        c.lrn_hidden = j.value("lrn_hidden", c.lrn_hidden);
        c.k_top = j.value("k_top", c.k_top);
        c.head_hidden = j.value("head_hidden", c.head_hidden);
        c.sim_d_s = j.value("sim_d_s", c.sim_d_s);
        c.sim_gain = j.value("sim_gain", c.sim_gain);
        c.t_steps = j.value("t_steps", c.t_steps);
        c.beta_min = j.value("beta_min", c.beta_min);
        c.beta_max = j.value("beta_max", c.beta_max);
        c.guide_scale = j.value("guide_scale", c.guide_scale);
        c.denoise_steps_used = j.value("denoise_steps_used", c.denoise_steps_used);
        c.ancestral_sampling = j.value("ancestral_sampling", c.ancestral_sampling);
        c.p_drop = j.value("p_drop", c.p_drop);
        c.temporal_pool = j.value("temporal_pool", c.temporal_pool);
        c.dist_loss_target = j.value("dist_loss_target", c.dist_loss_target);
        return c;
    }
};

}  // namespace tactictraj
