#include <gtest/gtest.h>

#include "support/fd_check.hpp"
#include "tactictraj/learner.hpp"
#include "tactictraj/synth.hpp"

using namespace tactictraj;

namespace {

ModelConfig cfg_small() {
    ModelConfig cfg;
    cfg.d_a = 12;
    cfg.d_c = 4;
    cfg.lrn_hidden = 8;
    cfg.k_top = 5;
    return cfg;
}

Scene one_scene() {
    SeededRng rng(31);
    DatasetConfig data;
    return synth_generate(rng, data, 1, GeneratorConfig{})[0];
}

}  // namespace

TEST(Learner, ZeroOutputHeadGivesUniformRows) {
    ModelConfig cfg = cfg_small();
    ParamStore ps;
    SeededRng rng(1);
    init_learner_params(ps, cfg, rng);
    for (auto& [name, t] : ps.params()) {
        if (name.rfind("lrn.out", 0) == 0) std::fill(t.data().begin(), t.data().end(), 0.0);
    }
    Scene s = one_scene();
    SeededRng rng2(2);
    Tensor a = rng2.gaussian_tensor({11, cfg.d_a});
    DatasetConfig data;
    auto per_team = predict_interaction(ps, cfg, a, s, data);
    ASSERT_EQ(per_team.size(), 2u);
    for (const auto& t : per_team) {
        EXPECT_EQ(t.rows(), 6u);
        EXPECT_EQ(t.cols(), 5u);
        for (double v : t.data()) EXPECT_NEAR(v, 0.2, 1e-15);
    }
}

TEST(Learner, RowStochasticOutput) {
    ModelConfig cfg = cfg_small();
    ParamStore ps;
    SeededRng rng(3);
    init_learner_params(ps, cfg, rng);
    Scene s = one_scene();
    Tensor a = rng.gaussian_tensor({11, cfg.d_a});
    DatasetConfig data;
    auto per_team = predict_interaction(ps, cfg, a, s, data);
    for (const auto& t : per_team) {
        for (std::size_t r = 0; r < t.rows(); ++r) {
            double sum = 0.0;
            for (std::size_t c = 0; c < t.cols(); ++c) sum += t.at(r, c);
            EXPECT_NEAR(sum, 1.0, 1e-9);
        }
    }
}

TEST(Learner, AgentPermutationEquivariance) {
    ModelConfig cfg = cfg_small();
    ParamStore ps;
    SeededRng rng(4);
    init_learner_params(ps, cfg, rng);
    Tensor a = rng.gaussian_tensor({7, cfg.d_a});
    Graph g1;
    Tensor base = g1.value(predict_interaction_scene_g(g1, ps, cfg, g1.input(a)));

    Tensor perm = a;  // swap rows 2 and 5
    for (std::size_t c = 0; c < cfg.d_a; ++c) std::swap(perm.at(2, c), perm.at(5, c));
    Graph g2;
    Tensor swapped = g2.value(predict_interaction_scene_g(g2, ps, cfg, g2.input(perm)));
    for (std::size_t c = 0; c < cfg.k_top; ++c) {
        EXPECT_NEAR(swapped.at(2, c), base.at(5, c), 1e-12);
        EXPECT_NEAR(swapped.at(5, c), base.at(2, c), 1e-12);
        EXPECT_NEAR(swapped.at(0, c), base.at(0, c), 1e-12);
    }
}

TEST(Learner, LossBiValues) {
    Tensor a = Tensor::full({6, 5}, 0.3);
    Tensor b = a;
    EXPECT_DOUBLE_EQ(loss_bi({a}, {b}), 0.0);

    Tensor c = Tensor::full({6, 5}, 0.4);  // difference of 0.1 everywhere
    const double expected = 0.1 * std::sqrt(30.0);
    EXPECT_NEAR(loss_bi({a}, {c}), expected, 1e-12);
    EXPECT_NEAR(expected, 0.5477, 1e-4);

    // Two identical teams double the loss.
    EXPECT_NEAR(loss_bi({a, a}, {c, c}), 2.0 * expected, 1e-12);

    Tensor bad({5, 5});
    EXPECT_THROW(loss_bi({a}, {bad}), ShapeError);
    EXPECT_THROW(loss_bi({a, a}, {c}), ShapeError);
}

TEST(Learner, LossBiGradientMatchesFiniteDifferences) {
    ModelConfig cfg = cfg_small();
    ParamStore ps;
    SeededRng rng(5);
    init_learner_params(ps, cfg, rng);
    Scene s = one_scene();
    Tensor a = rng.gaussian_tensor({11, cfg.d_a});
    DatasetConfig data;
    std::vector<Tensor> targets = {rng.gaussian_tensor({6, 5}), rng.gaussian_tensor({6, 5})};
    for (auto& t : targets)
        for (double& v : t.data()) v = std::abs(v) * 0.2;

    auto build = [&](Graph& g, ParamStore& p) {
        Var scene_i = predict_interaction_scene_g(g, p, cfg, g.input(a));
        auto team_vars = slice_interaction_per_team_g(g, scene_i, s, data);
        return loss_bi_g(g, team_vars, targets);
    };
    SeededRng probe(6);
    auto rep = tactictraj::testing::fd_check(ps, build, 48, probe);
    EXPECT_LE(rep.max_rel_err, 1e-5) << rep.worst_param;
}
