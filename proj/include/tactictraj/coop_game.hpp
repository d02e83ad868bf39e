#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tactictraj/rng.hpp"
#include "tactictraj/tensor.hpp"

namespace tactictraj {

using nlohmann::json;

/// Cooperative game: n players and a characteristic function over coalition
/// bitmasks (bit p set <=> player p in the coalition).
struct CooperativeGame {
    std::size_t n_players = 0;
    std::function<double(std::uint64_t)> phi;
};

/// Hard cap for exact enumeration: 2^(n-2) coalition blocks per pair.
constexpr std::size_t kBanzhafEnumerationCap = 22;

/// Exact Banzhaf interaction of the pair {i, j}:
///   I = sum_{C subset N\{i,j}} p(C) [phi(C+ij) + phi(C) - phi(C+i) - phi(C+j)]
/// with p(C) = 1 / 2^(n-2), enumerated over all 2^(n-2) coalitions.
inline double banzhaf_interaction_exact(const CooperativeGame& game, std::size_t i,
                                        std::size_t j) {
    if (i == j || i >= game.n_players || j >= game.n_players) {
        throw ArgumentError("banzhaf pair (" + std::to_string(i) + "," + std::to_string(j) +
                            ") invalid for n=" + std::to_string(game.n_players));
    }
    if (game.n_players > kBanzhafEnumerationCap) {
        throw CapacityError("exact Banzhaf enumeration capped at n=" +
                            std::to_string(kBanzhafEnumerationCap) + ", got n=" +
                            std::to_string(game.n_players));
    }
    std::vector<std::size_t> others;
    for (std::size_t p = 0; p < game.n_players; ++p)
        if (p != i && p != j) others.push_back(p);
    const std::uint64_t bi = 1ULL << i;
    const std::uint64_t bj = 1ULL << j;
    const std::uint64_t n_subsets = 1ULL << others.size();
    double sum = 0.0;
    for (std::uint64_t sub = 0; sub < n_subsets; ++sub) {
        std::uint64_t c = 0;
        for (std::size_t b = 0; b < others.size(); ++b)
            if (sub & (1ULL << b)) c |= 1ULL << others[b];
        sum += game.phi(c | bi | bj) + game.phi(c) - game.phi(c | bi) - game.phi(c | bj);
    }
    return sum / static_cast<double>(n_subsets);
}

/// Tabular game from the CLI file format {"n": int, "phi": {"<mask>": value}}.
inline CooperativeGame game_from_json(const json& j) {
    CooperativeGame game;
    game.n_players = j.at("n").get<std::size_t>();
    auto table = std::make_shared<std::unordered_map<std::uint64_t, double>>();
    for (const auto& [key, val] : j.at("phi").items()) {
        table->emplace(std::stoull(key), val.get<double>());
    }
    game.phi = [table](std::uint64_t mask) {
        auto it = table->find(mask);
        if (it == table->end()) {
            throw DataError("game table missing coalition " + std::to_string(mask));
        }
        return it->second;
    };
    return game;
}

/// Default characteristic function derived from a similarity matrix S
/// (agents x tactics): players are the N_T agents followed by the k tactics,
/// phi(C) = log(1 + sum exp(S[a,t])) over pairs fully inside the coalition.
/// phi(empty) = 0 and phi is monotone in coalition growth.
inline CooperativeGame lse_game_from_similarity(const Tensor& s) {
    const std::size_t n_agents = s.rows(), n_tactics = s.cols();
    CooperativeGame game;
    game.n_players = n_agents + n_tactics;
    Tensor logits = s;
    game.phi = [logits, n_agents, n_tactics](std::uint64_t mask) {
        double acc = 0.0;
        for (std::size_t a = 0; a < n_agents; ++a) {
            if (!(mask & (1ULL << a))) continue;
            for (std::size_t t = 0; t < n_tactics; ++t) {
                if (!(mask & (1ULL << (n_agents + t)))) continue;
                acc += std::exp(logits.at(a, t));
            }
        }
        return std::log1p(acc);
    };
    return game;
}

// ---- masked-similarity interaction targets ----------------------------------

struct MaskSamplerConfig {
    std::size_t n_mask_samples = 16;
    double keep_probability = 0.5;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_mask_samples < 1) throw ArgumentError("n_mask_samples must be >= 1");
        if (!(keep_probability > 0.0 && keep_probability <= 1.0)) {
            throw ArgumentError("keep_probability must lie in (0, 1]");
        }
    }
};

struct InteractionTargets {
    Tensor i_b;  // N_T x k, entries in [0, 1]
    std::string provenance = "oracle";
};

/// Similarity logits S[a,t] = <proj_a(token_a), proj_t(tactic_t)> / sqrt(D_s).
inline Tensor similarity_logits(const Tensor& agent_tokens, const Tensor& tactic_embeddings,
                                const Tensor& proj_agent, const Tensor& proj_tactic) {
    if (agent_tokens.cols() != proj_agent.rows() ||
        tactic_embeddings.cols() != proj_tactic.rows() || proj_agent.cols() != proj_tactic.cols()) {
        throw ShapeError("similarity projection mismatch: tokens " +
                         Tensor::shape_string(agent_tokens.shape()) + " proj " +
                         Tensor::shape_string(proj_agent.shape()) + ", tactics " +
                         Tensor::shape_string(tactic_embeddings.shape()) + " proj " +
                         Tensor::shape_string(proj_tactic.shape()));
    }
    Tensor pa = matmul(agent_tokens, proj_agent);
    Tensor pt = matmul(tactic_embeddings, proj_tactic);
    Tensor s = matmul(pa, transpose(pt));
    const double inv = 1.0 / std::sqrt(static_cast<double>(proj_agent.cols()));
    for (double& v : s.data()) v *= inv;
    return s;
}

namespace coop_detail {

inline std::vector<bool> draw_mask(std::size_t n, double keep_p, SeededRng& rng) {
    std::vector<bool> mask(n);
    while (true) {
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            mask[i] = rng.bernoulli(keep_p);
            any |= mask[i];
        }
        if (any) return mask;  // all-zero masks are resampled
    }
}

}  // namespace coop_detail

/// Masked-similarity interaction: average over mask samples of
///   (row-softmax of S with masked-out agents going uniform
///    + column-softmax of S with masked-out tactics going uniform)^T / 2.
/// Masked rows/columns contribute uniform distributions, matching softmax of
/// zeroed logits. keep_probability = 1 is deterministic.
inline InteractionTargets masked_interaction(const Tensor& s, const MaskSamplerConfig& cfg) {
    cfg.validate();
    const std::size_t n_t = s.rows(), k = s.cols();
    SeededRng rng(cfg.seed);
    Tensor accum({n_t, k});
    for (std::size_t sample = 0; sample < cfg.n_mask_samples; ++sample) {
        const auto mask_a = coop_detail::draw_mask(n_t, cfg.keep_probability, rng);
        const auto mask_t = coop_detail::draw_mask(k, cfg.keep_probability, rng);

        // Agent-to-tactic: softmax over the tactic axis per kept agent row.
        Tensor a2t({n_t, k});
        for (std::size_t a = 0; a < n_t; ++a) {
            if (!mask_a[a]) {
                for (std::size_t t = 0; t < k; ++t) a2t.at(a, t) = 1.0 / static_cast<double>(k);
                continue;
            }
            Tensor row({1, k});
            for (std::size_t t = 0; t < k; ++t) row.at(0, t) = s.at(a, t);
            Tensor sm = softmax_rows(row);
            for (std::size_t t = 0; t < k; ++t) a2t.at(a, t) = sm.at(0, t);
        }

        // Tactic-to-agent: softmax over the agent axis per kept tactic column.
        Tensor t2a({n_t, k});
        for (std::size_t t = 0; t < k; ++t) {
            if (!mask_t[t]) {
                for (std::size_t a = 0; a < n_t; ++a)
                    t2a.at(a, t) = 1.0 / static_cast<double>(n_t);
                continue;
            }
            Tensor col({1, n_t});
            for (std::size_t a = 0; a < n_t; ++a) col.at(0, a) = s.at(a, t);
            Tensor sm = softmax_rows(col);
            for (std::size_t a = 0; a < n_t; ++a) t2a.at(a, t) = sm.at(0, a);
        }

        for (std::size_t i = 0; i < accum.numel(); ++i)
            accum[i] += 0.5 * (a2t[i] + t2a[i]);
    }
    InteractionTargets out;
    out.i_b = scale(accum, 1.0 / static_cast<double>(cfg.n_mask_samples));
    return out;
}

}  // namespace tactictraj
