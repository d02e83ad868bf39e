#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tactictraj/graph.hpp"
#include "tactictraj/params.hpp"

namespace tactictraj {

/// Layer sizes for an affine/ReLU chain: sizes = {in, h1, ..., out}.
/// Activation is ReLU on every layer except the last, which stays linear.
struct MlpSpec {
    std::vector<std::size_t> sizes;
};

inline std::string layer_w(const std::string& prefix, std::size_t i) {
    return prefix + ".w" + std::to_string(i);
}
inline std::string layer_b(const std::string& prefix, std::size_t i) {
    return prefix + ".b" + std::to_string(i);
}

/// Register MLP parameters (Xavier weights, zero biases) under a prefix.
inline void init_mlp(ParamStore& ps, const std::string& prefix, const MlpSpec& spec,
                     SeededRng& rng) {
    if (spec.sizes.size() < 2) throw ConfigError("mlp spec needs at least two sizes: " + prefix);
    for (std::size_t i = 0; i + 1 < spec.sizes.size(); ++i) {
        ps.add(layer_w(prefix, i), xavier_uniform(spec.sizes[i], spec.sizes[i + 1], rng));
        ps.add(layer_b(prefix, i), Tensor({1, spec.sizes[i + 1]}));
    }
}

/// Forward through an MLP on the tape; x rows are independent samples.
inline Var mlp_apply(Graph& g, ParamStore& ps, const std::string& prefix, const MlpSpec& spec,
                     Var x) {
    if (g.value(x).cols() != spec.sizes.front()) {
        throw ConfigError("mlp input width " + std::to_string(g.value(x).cols()) +
                          " does not match spec front " + std::to_string(spec.sizes.front()) +
                          " for " + prefix);
    }
    Var h = x;
    for (std::size_t i = 0; i + 1 < spec.sizes.size(); ++i) {
        const Tensor& w = ps.param(layer_w(prefix, i));
        if (w.rows() != spec.sizes[i] || w.cols() != spec.sizes[i + 1]) {
            throw ConfigError("mlp parameter " + layer_w(prefix, i) + " has shape " +
                              Tensor::shape_string(w.shape()) + ", spec expects (" +
                              std::to_string(spec.sizes[i]) + "x" + std::to_string(spec.sizes[i + 1]) +
                              ")");
        }
        h = g.add_rowvec(g.matmul(h, g.param(ps, layer_w(prefix, i))),
                         g.param(ps, layer_b(prefix, i)));
        if (i + 2 < spec.sizes.size()) h = g.relu(h);
    }
    return h;
}

/// Plain (no-tape) MLP evaluation against a ParamStore; the numeric-core
/// forward used by tests and by callers that never backprop.
inline Tensor mlp_forward(const ParamStore& ps, const std::string& prefix, const MlpSpec& spec,
                          const Tensor& x) {
    if (spec.sizes.size() < 2) throw ConfigError("mlp spec needs at least two sizes: " + prefix);
    if (x.cols() != spec.sizes.front()) {
        throw ConfigError("mlp input width " + std::to_string(x.cols()) +
                          " does not match spec front " + std::to_string(spec.sizes.front()));
    }
    Tensor h = x;
    for (std::size_t i = 0; i + 1 < spec.sizes.size(); ++i) {
        if (!ps.has(layer_w(prefix, i)) || !ps.has(layer_b(prefix, i))) {
            throw ConfigError("missing mlp parameters for " + prefix + " layer " +
                              std::to_string(i));
        }
        const Tensor& w = ps.param(layer_w(prefix, i));
        const Tensor& b = ps.param(layer_b(prefix, i));
        if (w.rows() != spec.sizes[i] || w.cols() != spec.sizes[i + 1]) {
            throw ConfigError("mlp parameter " + layer_w(prefix, i) + " shape " +
                              Tensor::shape_string(w.shape()) + " mismatches spec");
        }
        h = matmul(h, w);
        for (std::size_t r = 0; r < h.rows(); ++r)
            for (std::size_t c = 0; c < h.cols(); ++c) h.at(r, c) += b.at(0, c);
        if (i + 2 < spec.sizes.size()) {
            for (double& v : h.data()) v = v > 0.0 ? v : 0.0;
        }
    }
    return h;
}

inline void init_linear(ParamStore& ps, const std::string& prefix, std::size_t in, std::size_t out,
                        SeededRng& rng) {
    ps.add(prefix + ".w", xavier_uniform(in, out, rng));
    ps.add(prefix + ".b", Tensor({1, out}));
}

inline Var linear_apply(Graph& g, ParamStore& ps, const std::string& prefix, Var x) {
    return g.add_rowvec(g.matmul(x, g.param(ps, prefix + ".w")), g.param(ps, prefix + ".b"));
}

inline void init_layer_norm(ParamStore& ps, const std::string& prefix, std::size_t width) {
    ps.add(prefix + ".gain", Tensor::full({1, width}, 1.0));
    ps.add(prefix + ".bias", Tensor({1, width}));
}

inline Var layer_norm_apply(Graph& g, ParamStore& ps, const std::string& prefix, Var x) {
    return g.layer_norm_rows(x, g.param(ps, prefix + ".gain"), g.param(ps, prefix + ".bias"));
}

/// Scaled-dot attention on the tape; logits divided by sqrt(d) before softmax.
inline Var attention_apply(Graph& g, Var q, Var k, Var v) {
    const double inv = 1.0 / std::sqrt(static_cast<double>(g.value(q).cols()));
    Var logits = g.scale(g.matmul(q, g.transpose(k)), inv);
    return g.matmul(g.softmax_rows(logits), v);
}

// ---- multi-head self-attention / transformer encoder block ----------------

struct AttentionSpec {
    std::size_t width = 0;  // model width
    std::size_t heads = 1;
};

inline void init_self_attention(ParamStore& ps, const std::string& prefix,
                                const AttentionSpec& spec, SeededRng& rng) {
    if (spec.width % spec.heads != 0) {
        throw ConfigError("attention width " + std::to_string(spec.width) +
                          " not divisible by heads " + std::to_string(spec.heads));
    }
    init_linear(ps, prefix + ".q", spec.width, spec.width, rng);
    init_linear(ps, prefix + ".k", spec.width, spec.width, rng);
    init_linear(ps, prefix + ".v", spec.width, spec.width, rng);
    init_linear(ps, prefix + ".o", spec.width, spec.width, rng);
}

inline Var self_attention_apply(Graph& g, ParamStore& ps, const std::string& prefix,
                                const AttentionSpec& spec, Var x) {
    Var q = linear_apply(g, ps, prefix + ".q", x);
    Var k = linear_apply(g, ps, prefix + ".k", x);
    Var v = linear_apply(g, ps, prefix + ".v", x);
    const std::size_t dh = spec.width / spec.heads;
    std::vector<Var> heads;
    heads.reserve(spec.heads);
    for (std::size_t h = 0; h < spec.heads; ++h) {
        Var qh = g.slice_cols(q, h * dh, (h + 1) * dh);
        Var kh = g.slice_cols(k, h * dh, (h + 1) * dh);
        Var vh = g.slice_cols(v, h * dh, (h + 1) * dh);
        heads.push_back(attention_apply(g, qh, kh, vh));
    }
    Var cat = heads[0];
    for (std::size_t h = 1; h < heads.size(); ++h) cat = g.concat_cols(cat, heads[h]);
    return linear_apply(g, ps, prefix + ".o", cat);
}

struct EncoderBlockSpec {
    std::size_t width = 0;
    std::size_t heads = 1;
    std::size_t ff_width = 0;
};

inline void init_encoder_block(ParamStore& ps, const std::string& prefix,
                               const EncoderBlockSpec& spec, SeededRng& rng) {
    init_layer_norm(ps, prefix + ".ln1", spec.width);
    init_self_attention(ps, prefix + ".attn", {spec.width, spec.heads}, rng);
    init_layer_norm(ps, prefix + ".ln2", spec.width);
    init_mlp(ps, prefix + ".ff", {{spec.width, spec.ff_width, spec.width}}, rng);
}

/// Pre-norm transformer encoder block: x + Attn(LN(x)), then + FF(LN(.)).
inline Var encoder_block_apply(Graph& g, ParamStore& ps, const std::string& prefix,
                               const EncoderBlockSpec& spec, Var x) {
    Var a = self_attention_apply(g, ps, prefix + ".attn", {spec.width, spec.heads},
                                 layer_norm_apply(g, ps, prefix + ".ln1", x));
    Var h = g.add(x, a);
    Var f = mlp_apply(g, ps, prefix + ".ff", {{spec.width, spec.ff_width, spec.width}},
                      layer_norm_apply(g, ps, prefix + ".ln2", h));
    return g.add(h, f);
}

/// Sinusoidal position table for `length` steps at `width` dims.
inline Tensor sinusoidal_positions(std::size_t length, std::size_t width) {
    Tensor t({length, width});
    for (std::size_t pos = 0; pos < length; ++pos) {
        for (std::size_t i = 0; i < width; ++i) {
            const double exponent = static_cast<double>(2 * (i / 2)) / static_cast<double>(width);
            const double angle = static_cast<double>(pos) / std::pow(10000.0, exponent);
            t.at(pos, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    }
    return t;
}

/// Sinusoidal embedding of a single (timestep) index as a 1 x width row.
inline Tensor sinusoidal_scalar(double value, std::size_t width) {
    Tensor t({1, width});
    for (std::size_t i = 0; i < width; ++i) {
        const double exponent = static_cast<double>(2 * (i / 2)) / static_cast<double>(width);
        const double angle = value / std::pow(10000.0, exponent);
        t.at(0, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
    return t;
}

// ---- graph attention layer -------------------------------------------------

struct GatSpec {
    std::size_t width = 0;
    double leaky_slope = 0.2;
};

inline void init_gat(ParamStore& ps, const std::string& prefix, const GatSpec& spec,
                     SeededRng& rng) {
    ps.add(prefix + ".w", xavier_uniform(spec.width, spec.width, rng));
    ps.add(prefix + ".a_src", xavier_uniform(spec.width, 1, rng));
    ps.add(prefix + ".a_dst", xavier_uniform(spec.width, 1, rng));
}

/// Single-head GAT over a fully connected node set (self-loops included):
/// e_ij = LeakyReLU(a_src . Wh_i + a_dst . Wh_j), alpha = row softmax, out = alpha W h.
inline Var gat_apply(Graph& g, ParamStore& ps, const std::string& prefix, const GatSpec& spec,
                     Var nodes) {
    Var z = g.matmul(nodes, g.param(ps, prefix + ".w"));
    Var s_src = g.matmul(z, g.param(ps, prefix + ".a_src"));
    Var s_dst = g.matmul(z, g.param(ps, prefix + ".a_dst"));
    Var e = g.leaky_relu(g.outer_sum(s_src, s_dst), spec.leaky_slope);
    Var alpha = g.softmax_rows(e);
    return g.matmul(alpha, z);
}

}  // namespace tactictraj
