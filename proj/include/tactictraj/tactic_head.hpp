#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "tactictraj/config.hpp"
#include "tactictraj/layers.hpp"

namespace tactictraj {

struct FocalConfig {
    Tensor alpha;  // 1 x V class weights
    double gamma = 4.0;
};

struct TacticPrediction {
    Tensor probabilities;           // 1 x V
    std::vector<int> top_labels;    // k labels, descending probability
    Tensor top_embeddings;          // k x D_C
};

inline MlpSpec head_mlp_spec(const ModelConfig& cfg, std::size_t vocab_size) {
    return {{cfg.d_g(), cfg.head_hidden, vocab_size}};
}

inline void init_head_params(ParamStore& ps, const ModelConfig& cfg, const DatasetConfig& data,
                             SeededRng& rng) {
    init_gat(ps, "head.gat", {cfg.d_g(), 0.2}, rng);
    init_mlp(ps, "head.mlp", head_mlp_spec(cfg, data.vocab_size), rng);
}

/// Eq.-style fusion: each token row is scaled by the mass of its interaction
/// row. Under a row-stochastic I_pred the mass is 1 and fusion is identity.
inline Var fuse_weighted_g(Graph& g, Var enhanced_tokens, Var team_interaction) {
    const Tensor& e = g.value(enhanced_tokens);
    const Tensor& i = g.value(team_interaction);
    if (e.rows() != i.rows()) {
        throw ShapeError("fusion row mismatch " + Tensor::shape_string(e.shape()) + " vs " +
                         Tensor::shape_string(i.shape()));
    }
    return g.mul_colvec(enhanced_tokens, g.sum_cols(team_interaction));
}

inline Tensor fuse_weighted(const Tensor& enhanced_tokens, const Tensor& team_interaction) {
    Graph g;
    return g.value(fuse_weighted_g(g, g.input(enhanced_tokens), g.input(team_interaction)));
}

/// GAT over the fully connected team graph, mean-pool, MLP to V logits,
/// softmax -> p_j.
inline Var predict_tactics_g(Graph& g, ParamStore& ps, const ModelConfig& cfg,
                             std::size_t vocab_size, Var weighted_tokens) {
    Var gat = gat_apply(g, ps, "head.gat", {cfg.d_g(), 0.2}, weighted_tokens);
    Var pooled = g.mean_rows(gat);
    Var logits = mlp_apply(g, ps, "head.mlp", head_mlp_spec(cfg, vocab_size), pooled);
    return g.softmax_rows(logits);
}

inline Tensor predict_tactics(ParamStore& ps, const ModelConfig& cfg, std::size_t vocab_size,
                              const Tensor& weighted_tokens) {
    Graph g;
    return g.value(predict_tactics_g(g, ps, cfg, vocab_size, g.input(weighted_tokens)));
}

/// Labels of the k largest probabilities, descending; exact ties broken by
/// ascending label id. Embeddings are the matching rows of W.
inline std::pair<std::vector<int>, Tensor> topk_extract(const Tensor& probabilities,
                                                        const Tensor& embedding, std::size_t k) {
    const std::size_t v = probabilities.numel();
    if (k < 1 || k > v) {
        throw ArgumentError("top-k k=" + std::to_string(k) + " outside [1, " + std::to_string(v) +
                            "]");
    }
    std::vector<int> order(v);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (probabilities[a] != probabilities[b]) return probabilities[a] > probabilities[b];
        return a < b;
    });
    order.resize(k);
    Tensor emb({k, embedding.cols()});
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < embedding.cols(); ++c)
            emb.at(r, c) = embedding.at(static_cast<std::size_t>(order[r]), c);
    }
    return {order, emb};
}

/// Focal loss -alpha_y (1 - p_y)^gamma log(p_y); p clamped at 1e-12.
inline double focal_loss(const Tensor& probabilities, int label, const FocalConfig& cfg) {
    if (label < 0 || static_cast<std::size_t>(label) >= probabilities.numel()) {
        throw ArgumentError("focal label " + std::to_string(label) + " outside distribution");
    }
    const double p = std::max(probabilities[static_cast<std::size_t>(label)], 1e-12);
    const double a = cfg.alpha.numel() == 0 ? 1.0 : cfg.alpha[static_cast<std::size_t>(label)];
    return -a * std::pow(1.0 - p, cfg.gamma) * std::log(p);
}

inline Var focal_loss_g(Graph& g, Var probabilities, int label, const FocalConfig& cfg) {
    const std::size_t y = static_cast<std::size_t>(label);
    if (label < 0 || y >= g.value(probabilities).cols()) {
        throw ArgumentError("focal label " + std::to_string(label) + " outside distribution");
    }
    Var p = g.clamp_min(g.slice_cols(probabilities, y, y + 1), 1e-12);
    Var one_minus = g.add_scalar(g.scale(p, -1.0), 1.0);
    Var weight = g.pow_const(one_minus, cfg.gamma);
    const double a = cfg.alpha.numel() == 0 ? 1.0 : cfg.alpha[y];
    return g.scale(g.hadamard(weight, g.log(p)), -a);
}

/// alpha_v proportional to 1 / max(count_v, 1), normalized so sum(alpha) = V.
inline Tensor class_weights_from_counts(const std::vector<std::size_t>& counts) {
    if (counts.empty() || std::all_of(counts.begin(), counts.end(),
                                      [](std::size_t c) { return c == 0; })) {
        throw ArgumentError("class weights need at least one nonzero count");
    }
    Tensor alpha({1, counts.size()});
    double total = 0.0;
    for (std::size_t v = 0; v < counts.size(); ++v) {
        alpha[v] = 1.0 / static_cast<double>(std::max<std::size_t>(counts[v], 1));
        total += alpha[v];
    }
    const double norm = static_cast<double>(counts.size()) / total;
    for (double& w : alpha.data()) w *= norm;
    return alpha;
}

}  // namespace tactictraj
