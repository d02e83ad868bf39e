#include <gtest/gtest.h>

#include "tactictraj/enhance.hpp"
#include "tactictraj/model.hpp"
#include "tactictraj/synth.hpp"

using namespace tactictraj;

namespace {

ModelConfig small_cfg() {
    ModelConfig cfg;
    cfg.d_model = 16;
    cfg.enc_layers = 1;
    cfg.enc_heads = 2;
    cfg.d_a = 10;
    cfg.d_c = 6;  // d_g = 16
    cfg.enh_d_k = 8;
    cfg.den_width = 16;
    cfg.den_heads = 2;
    cfg.t_steps = 10;
    cfg.k_top = 3;
    return cfg;
}

ParamStore enhance_params(std::uint64_t seed = 11) {
    ParamStore ps;
    SeededRng rng(seed);
    init_enhance_params(ps, small_cfg(), rng);
    return ps;
}

Scene one_scene() {
    SeededRng rng(21);
    DatasetConfig data;
    return synth_generate(rng, data, 1, GeneratorConfig{})[0];
}

}  // namespace

TEST(Enhance, SplitTeamsSharesBallRow) {
    Scene s = one_scene();
    SeededRng rng(1);
    Tensor g = rng.gaussian_tensor({11, 16});
    auto teams = split_teams(g, s, 2, 6);
    ASSERT_EQ(teams.size(), 2u);
    for (const auto& t : teams) {
        EXPECT_EQ(t.tokens.rows(), 6u);
        EXPECT_EQ(t.tokens.cols(), 16u);
        EXPECT_EQ(t.agent_indices.back(), s.ball_index);
    }
    for (std::size_t c = 0; c < 16; ++c) {
        EXPECT_EQ(teams[0].tokens.at(5, c), teams[1].tokens.at(5, c));
        EXPECT_EQ(teams[0].tokens.at(5, c), g.at(s.ball_index, c));
    }
}

TEST(Enhance, ShortTeamIsDataError) {
    Scene s = one_scene();
    s.team_of[2] = 1;  // team 0 now has 4 players
    SeededRng rng(2);
    Tensor g = rng.gaussian_tensor({11, 16});
    EXPECT_THROW(split_teams(g, s, 2, 6), DataError);
}

TEST(Enhance, MissingBallIsDataError) {
    Scene s = one_scene();
    s.team_of[s.ball_index] = 0;
    SeededRng rng(3);
    Tensor g = rng.gaussian_tensor({11, 16});
    EXPECT_THROW(split_teams(g, s, 2, 6), DataError);
}

TEST(Enhance, GlobalAttendConstantSceneRows) {
    // Every scene token equal to r: output rows are all r * W_v.
    ParamStore ps = enhance_params();
    SeededRng rng(4);
    Tensor r = rng.gaussian_tensor({1, 16});
    Tensor scene({7, 16});
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 16; ++j) scene.at(i, j) = r.at(0, j);
    Tensor team({6, 16});
    SeededRng rng2(5);
    for (double& v : team.data()) v = rng2.gaussian();
    Tensor out = global_attend(ps, team, scene);
    Tensor expected = matmul(r, ps.param("enh.gv"));
    EXPECT_EQ(out.rows(), 6u);
    EXPECT_EQ(out.cols(), 16u);  // width-preserving value path
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 16; ++j) EXPECT_NEAR(out.at(i, j), expected.at(0, j), 1e-12);
}

TEST(Enhance, GlobalAttendConcentratesOnMatchingToken) {
    // With Q = K = identity-scaled one-hot tokens and a large logit gap the
    // attention weight on the matching token exceeds 0.9.
    ModelConfig cfg = small_cfg();
    ParamStore ps;
    ps.add("enh.gq", Tensor({16, 8}));
    ps.add("enh.gk", Tensor({16, 8}));
    ps.add("enh.gv", Tensor({16, 16}));
    ps.add("enh.lq", Tensor({16, 8}));
    ps.add("enh.lk", Tensor({16, 8}));
    ps.add("enh.lv", Tensor({16, 8}));
    ps.add("enh.fuse", Tensor({8, 16}));
    for (std::size_t i = 0; i < 8; ++i) ps.param("enh.gq").at(i, i) = 1.0;
    for (std::size_t i = 0; i < 8; ++i) ps.param("enh.gk").at(i, i) = 1.0;
    for (std::size_t i = 0; i < 16; ++i) ps.param("enh.gv").at(i, i) = 1.0;

    const double gap = 3.0 * std::sqrt(8.0);  // logit gap of 3 after scaling
    Tensor scene({2, 16});
    scene.at(0, 0) = gap;   // matches the query direction
    scene.at(1, 1) = gap;   // orthogonal token
    scene.at(0, 8) = 1.0;   // distinguishing value features
    scene.at(1, 9) = 1.0;
    Tensor team({1, 16});
    team.at(0, 0) = 1.0;
    Tensor out = global_attend(ps, team, scene);
    // Weight on token 0 is sigma(logit gap) applied to value column 8.
    EXPECT_GT(out.at(0, 8), 0.9);
    EXPECT_LT(out.at(0, 9), 0.1);
}

TEST(Enhance, LocalAttendSingleKeyWeightIsOne) {
    ParamStore ps = enhance_params();
    SeededRng rng(6);
    Tensor global = rng.gaussian_tensor({6, 16});
    Tensor ball = rng.gaussian_tensor({1, 16});
    Tensor out = local_attend(ps, global, ball);
    Tensor expected = matmul(ball, ps.param("enh.lv"));
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(out.at(i, j), expected.at(0, j), 1e-12);

    // Different queries, same ball: identical local value rows.
    Tensor other = rng.gaussian_tensor({6, 16});
    Tensor out2 = local_attend(ps, other, ball);
    EXPECT_LE(out.max_abs_diff(out2), 1e-12);
}

TEST(Enhance, ZeroBallGivesZeroLocalValue) {
    ParamStore ps = enhance_params();
    SeededRng rng(7);
    Tensor global = rng.gaussian_tensor({6, 16});
    Tensor zero_ball({1, 16});
    Tensor out = local_attend(ps, global, zero_ball);
    for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(Enhance, FuseResidualIdentityAndAdditivity) {
    ParamStore ps = enhance_params();
    SeededRng rng(8);
    Tensor global = rng.gaussian_tensor({6, 16});
    Tensor zero_local({6, 8});
    Tensor same = fuse(ps, global, zero_local);
    EXPECT_EQ(same.max_abs_diff(global), 0.0);

    Tensor local = rng.gaussian_tensor({6, 8});
    Tensor fused = fuse(ps, global, local);
    Tensor delta = sub(fused, same);
    Tensor expected = matmul(local, ps.param("enh.fuse"));
    EXPECT_LE(delta.max_abs_diff(expected), 1e-12);
    EXPECT_EQ(fused.rows(), 6u);
    EXPECT_EQ(fused.cols(), 16u);
}

TEST(Enhance, PermutingPlayersPermutesOutput) {
    ParamStore ps = enhance_params();
    SeededRng rng(9);
    Tensor scene = rng.gaussian_tensor({11, 16});
    Tensor team({6, 16});
    for (std::size_t r = 0; r < 6; ++r)
        for (std::size_t c = 0; c < 16; ++c) team.at(r, c) = scene.at(r, c);
    Tensor base = enhance_team(ps, team, scene);

    Tensor swapped = team;  // swap player rows 1 and 3 (ball row stays last)
    for (std::size_t c = 0; c < 16; ++c) std::swap(swapped.at(1, c), swapped.at(3, c));
    Tensor out = enhance_team(ps, swapped, scene);
    for (std::size_t c = 0; c < 16; ++c) {
        EXPECT_NEAR(out.at(1, c), base.at(3, c), 1e-12);
        EXPECT_NEAR(out.at(3, c), base.at(1, c), 1e-12);
        EXPECT_NEAR(out.at(0, c), base.at(0, c), 1e-12);
        EXPECT_NEAR(out.at(5, c), base.at(5, c), 1e-12);
    }
}
