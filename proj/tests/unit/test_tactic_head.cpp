#include <gtest/gtest.h>

#include <cmath>

#include "support/fd_check.hpp"
#include "tactictraj/tactic_head.hpp"

using namespace tactictraj;

namespace {

ModelConfig head_cfg() {
    ModelConfig cfg;
    cfg.d_a = 10;
    cfg.d_c = 6;  // d_g = 16
    cfg.head_hidden = 12;
    cfg.k_top = 3;
    return cfg;
}

}  // namespace

TEST(Fusion, RowStochasticInteractionIsIdentity) {
    SeededRng rng(1);
    Tensor tokens = rng.gaussian_tensor({6, 16});
    Tensor inter = Tensor::full({6, 5}, 0.2);  // rows sum to 1
    Tensor w = fuse_weighted(tokens, inter);
    EXPECT_EQ(w.max_abs_diff(tokens), 0.0);
}

TEST(Fusion, ZeroRowZeroesToken) {
    SeededRng rng(2);
    Tensor tokens = rng.gaussian_tensor({6, 16});
    Tensor inter = Tensor::full({6, 5}, 0.2);
    for (std::size_t c = 0; c < 5; ++c) inter.at(2, c) = 0.0;
    Tensor w = fuse_weighted(tokens, inter);
    for (std::size_t c = 0; c < 16; ++c) EXPECT_EQ(w.at(2, c), 0.0);
    for (std::size_t c = 0; c < 16; ++c) EXPECT_EQ(w.at(1, c), tokens.at(1, c));
}

TEST(Fusion, LinearInInteractionMass) {
    SeededRng rng(3);
    Tensor tokens = rng.gaussian_tensor({6, 16});
    Tensor inter = Tensor::full({6, 5}, 0.2);
    Tensor doubled = inter;
    for (std::size_t c = 0; c < 5; ++c) doubled.at(4, c) *= 2.0;
    Tensor w1 = fuse_weighted(tokens, inter);
    Tensor w2 = fuse_weighted(tokens, doubled);
    for (std::size_t c = 0; c < 16; ++c) EXPECT_NEAR(w2.at(4, c), 2.0 * w1.at(4, c), 1e-12);
}

TEST(Head, ZeroMlpGivesUniform) {
    ModelConfig cfg = head_cfg();
    DatasetConfig data;
    ParamStore ps;
    SeededRng rng(4);
    init_head_params(ps, cfg, data, rng);
    for (auto& [name, t] : ps.params()) {
        if (name.rfind("head.mlp", 0) == 0) std::fill(t.data().begin(), t.data().end(), 0.0);
    }
    Tensor w = rng.gaussian_tensor({6, 16});
    Tensor p = predict_tactics(ps, cfg, data.vocab_size, w);
    EXPECT_EQ(p.cols(), 16u);
    for (double v : p.data()) EXPECT_NEAR(v, 1.0 / 16.0, 1e-15);
}

TEST(Head, DistributionAndPermutationInvariance) {
    ModelConfig cfg = head_cfg();
    DatasetConfig data;
    ParamStore ps;
    SeededRng rng(5);
    init_head_params(ps, cfg, data, rng);
    Tensor w = rng.gaussian_tensor({6, 16});
    Tensor p = predict_tactics(ps, cfg, data.vocab_size, w);
    double sum = 0.0;
    for (double v : p.data()) {
        EXPECT_GE(v, 0.0);
        sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);

    Tensor perm = w;  // swap node rows 0 and 4
    for (std::size_t c = 0; c < 16; ++c) std::swap(perm.at(0, c), perm.at(4, c));
    Tensor p2 = predict_tactics(ps, cfg, data.vocab_size, perm);
    EXPECT_LE(p.max_abs_diff(p2), 1e-12);
}

TEST(TopK, FullSortAndTies) {
    SeededRng rng(6);
    Tensor emb = rng.gaussian_tensor({4, 3});
    Tensor p = Tensor::row({0.1, 0.5, 0.4, 0.0});
    auto [labels2, emb2] = topk_extract(p, emb, 2);
    EXPECT_EQ(labels2, (std::vector<int>{1, 2}));
    EXPECT_EQ(emb2.rows(), 2u);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(emb2.at(0, c), emb.at(1, c));

    auto [all_labels, all_emb] = topk_extract(p, emb, 4);
    EXPECT_EQ(all_labels, (std::vector<int>{1, 2, 0, 3}));

    Tensor tie = Tensor::row({0.3, 0.2, 0.2, 0.3});
    auto [tied, tied_emb] = topk_extract(tie, emb, 3);
    EXPECT_EQ(tied, (std::vector<int>{0, 3, 1}));

    EXPECT_THROW(topk_extract(p, emb, 0), ArgumentError);
    EXPECT_THROW(topk_extract(p, emb, 5), ArgumentError);
}

TEST(TopK, InvariantUnderMonotoneTransform) {
    SeededRng rng(7);
    Tensor emb = rng.gaussian_tensor({8, 2});
    Tensor p({1, 8});
    for (std::size_t i = 0; i < 8; ++i) p[i] = rng.uniform();
    Tensor q = p;
    for (double& v : q.data()) v = std::exp(3.0 * v) + 1.0;  // strictly monotone
    auto [lp, ep] = topk_extract(p, emb, 8);
    auto [lq, eq] = topk_extract(q, emb, 8);
    EXPECT_EQ(lp, lq);
}

TEST(Focal, ReducesToCrossEntropyAtGammaZero) {
    Tensor p = Tensor::row({0.2, 0.5, 0.3});
    FocalConfig cfg{Tensor(), 0.0};
    for (int y = 0; y < 3; ++y) {
        EXPECT_NEAR(focal_loss(p, y, cfg), -std::log(p[y]), 1e-12);
    }
}

TEST(Focal, PerfectPredictionIsZero) {
    Tensor p = Tensor::row({0.0, 1.0, 0.0});
    FocalConfig cfg{Tensor(), 4.0};
    EXPECT_DOUBLE_EQ(focal_loss(p, 1, cfg), 0.0);
}

TEST(Focal, HandComputedGamma4) {
    Tensor p = Tensor::row({0.5, 0.5});
    FocalConfig cfg{Tensor(), 4.0};
    const double expected = std::pow(0.5, 4) * (-std::log(0.5));
    EXPECT_NEAR(focal_loss(p, 0, cfg), expected, 1e-12);
    EXPECT_NEAR(expected, 0.04332, 1e-5);
}

TEST(Focal, MonotoneDecreasingInP) {
    FocalConfig cfg{Tensor(), 4.0};
    double prev = std::numeric_limits<double>::infinity();
    for (double p = 0.05; p <= 0.95; p += 0.05) {
        Tensor dist = Tensor::row({p, 1.0 - p});
        const double loss = focal_loss(dist, 0, cfg);
        EXPECT_GE(loss, 0.0);
        EXPECT_LT(loss, prev);
        prev = loss;
    }
}

TEST(Focal, ClampsZeroProbability) {
    Tensor p = Tensor::row({0.0, 1.0});
    FocalConfig cfg{Tensor(), 2.0};
    const double loss = focal_loss(p, 0, cfg);
    EXPECT_TRUE(std::isfinite(loss));
    EXPECT_NEAR(loss, -std::log(1e-12), 1e-6);
}

TEST(Focal, GradientThroughSoftmaxMatchesFiniteDifferences) {
    ParamStore ps;
    SeededRng rng(8);
    ps.add("logits", rng.gaussian_tensor({1, 6}));
    FocalConfig cfg{Tensor::full({1, 6}, 1.0), 4.0};
    auto build = [&](Graph& g, ParamStore& p) {
        Var prob = g.softmax_rows(g.param(p, "logits"));
        return focal_loss_g(g, prob, 2, cfg);
    };
    SeededRng probe(9);
    auto rep = tactictraj::testing::fd_check(ps, build, 12, probe);
    EXPECT_LE(rep.max_rel_err, 1e-5) << rep.worst_param;
}

TEST(Focal, GraphMatchesPlain) {
    SeededRng rng(10);
    Tensor logits = rng.gaussian_tensor({1, 5});
    Tensor p = softmax_rows(logits);
    FocalConfig cfg{Tensor::full({1, 5}, 1.3), 4.0};
    Graph g;
    Var loss = focal_loss_g(g, g.input(p), 3, cfg);
    EXPECT_NEAR(g.value(loss)[0], focal_loss(p, 3, cfg), 1e-12);
}

TEST(ClassWeights, UniformAndHandComputed) {
    Tensor uniform = class_weights_from_counts({10, 10, 10, 10});
    for (double v : uniform.data()) EXPECT_NEAR(v, 1.0, 1e-12);

    Tensor w = class_weights_from_counts({30, 10});
    EXPECT_NEAR(w[0], 0.5, 1e-12);
    EXPECT_NEAR(w[1], 1.5, 1e-12);
}

TEST(ClassWeights, SumEqualsVAndZeroCountsGetMax) {
    Tensor w = class_weights_from_counts({0, 2, 4, 8, 0});
    double sum = 0.0;
    for (double v : w.data()) sum += v;
    EXPECT_NEAR(sum, 5.0, 1e-12);
    const double mx = *std::max_element(w.data().begin(), w.data().end());
    EXPECT_DOUBLE_EQ(w[0], mx);
    EXPECT_DOUBLE_EQ(w[4], mx);
    EXPECT_THROW(class_weights_from_counts({0, 0}), ArgumentError);
    EXPECT_THROW(class_weights_from_counts({}), ArgumentError);
}
