#include <gtest/gtest.h>

#include <cmath>

#include "support/fd_check.hpp"
#include "tactictraj/graph.hpp"
#include "tactictraj/layers.hpp"

using namespace tactictraj;
using tactictraj::testing::fd_check;

namespace {

// Random constant used to break symmetry in sum-based losses.
Tensor probe_matrix(std::size_t m, std::size_t n, std::uint64_t seed) {
    SeededRng rng(seed);
    return rng.gaussian_tensor({m, n});
}

}  // namespace

TEST(Autodiff, LinearGradientIsInput) {
    // loss = sum(W x): d loss / d W_ij = x_j.
    ParamStore ps;
    SeededRng rng(1);
    ps.add("w", rng.gaussian_tensor({3, 3}));
    Tensor x = rng.gaussian_tensor({3, 1});
    Graph g;
    Var loss = g.sum_all(g.matmul(g.param(ps, "w"), g.input(x)));
    g.backward(loss);
    const Tensor& gw = ps.grad("w");
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(gw.at(i, j), x.at(j, 0), 1e-14);
}

TEST(Autodiff, ConstantInParameterHasZeroGradient) {
    ParamStore ps;
    SeededRng rng(2);
    ps.add("used", rng.gaussian_tensor({2, 2}));
    ps.add("unused", rng.gaussian_tensor({2, 2}));
    Graph g;
    Var loss = g.sum_all(g.square(g.param(ps, "used")));
    g.backward(loss);
    for (double v : ps.grad("unused").data()) EXPECT_EQ(v, 0.0);
}

TEST(Autodiff, NonScalarLossRejected) {
    ParamStore ps;
    SeededRng rng(3);
    ps.add("w", rng.gaussian_tensor({2, 2}));
    Graph g;
    Var w = g.param(ps, "w");
    EXPECT_THROW(g.backward(w), ArgumentError);
}

TEST(Autodiff, TwoLayerMlpMatchesFiniteDifferences) {
    ParamStore ps;
    SeededRng rng(10);
    MlpSpec spec{{5, 8, 3}};
    init_mlp(ps, "mlp", spec, rng);
    // Non-zero bias moves ReLU pre-activations away from the kink.
    for (double& v : ps.param("mlp.b0").data()) v = 0.3;
    Tensor x = rng.gaussian_tensor({4, 5});
    Tensor c = probe_matrix(4, 3, 77);
    auto build = [&](Graph& g, ParamStore& p) {
        Var y = mlp_apply(g, p, "mlp", spec, g.input(x));
        return g.sum_all(g.hadamard(y, g.input(c)));
    };
    SeededRng probe_rng(5);
    auto rep = fd_check(ps, build, 64, probe_rng);
    EXPECT_LE(rep.max_rel_err, 1e-5) << rep.worst_param << "[" << rep.worst_index << "]";
}

TEST(Autodiff, SoftmaxGradient) {
    ParamStore ps;
    SeededRng rng(11);
    ps.add("x", rng.gaussian_tensor({3, 6}));
    Tensor c = probe_matrix(3, 6, 78);
    auto build = [&](Graph& g, ParamStore& p) {
        return g.sum_all(g.hadamard(g.softmax_rows(g.param(p, "x")), g.input(c)));
    };
    SeededRng probe_rng(6);
    auto rep = fd_check(ps, build, 40, probe_rng);
    EXPECT_LE(rep.max_rel_err, 1e-5) << rep.worst_param;
}

TEST(Autodiff, AttentionGradient) {
    ParamStore ps;
    SeededRng rng(12);
    ps.add("wq", rng.gaussian_tensor({4, 4}));
    ps.add("wk", rng.gaussian_tensor({4, 4}));
    ps.add("wv", rng.gaussian_tensor({4, 4}));
    Tensor x = rng.gaussian_tensor({5, 4});
    Tensor c = probe_matrix(5, 4, 79);
    auto build = [&](Graph& g, ParamStore& p) {
        Var xi = g.input(x);
        Var q = g.matmul(xi, g.param(p, "wq"));
        Var k = g.matmul(xi, g.param(p, "wk"));
        Var v = g.matmul(xi, g.param(p, "wv"));
        return g.sum_all(g.hadamard(attention_apply(g, q, k, v), g.input(c)));
    };
    SeededRng probe_rng(7);
    auto rep = fd_check(ps, build, 48, probe_rng);
    EXPECT_LE(rep.max_rel_err, 1e-5) << rep.worst_param;
}

TEST(Autodiff, LayerNormGradient) {
    ParamStore ps;
    SeededRng rng(13);
    ps.add("x", rng.gaussian_tensor({4, 6}));
    init_layer_norm(ps, "ln", 6);
    for (double& v : ps.param("ln.gain").data()) v = 1.3;
    for (double& v : ps.param("ln.bias").data()) v = -0.2;
    Tensor c = probe_matrix(4, 6, 80);
    auto build = [&](Graph& g, ParamStore& p) {
        Var y = layer_norm_apply(g, p, "ln", g.param(p, "x"));
        return g.sum_all(g.hadamard(y, g.input(c)));
    };
    SeededRng probe_rng(8);
    auto rep = fd_check(ps, build, 48, probe_rng);
    EXPECT_LE(rep.max_rel_err, 1e-5) << rep.worst_param;
}

TEST(Autodiff, EmbeddingGatherGradient) {
    ParamStore ps;
    SeededRng rng(14);
    ps.add("emb", rng.gaussian_tensor({7, 4}));
    Tensor c = probe_matrix(3, 4, 81);
    auto build = [&](Graph& g, ParamStore& p) {
        Var rows = g.gather_rows(g.param(p, "emb"), {2, 5, 2});
        return g.sum_all(g.hadamard(rows, g.input(c)));
    };
    SeededRng probe_rng(9);
    auto rep = fd_check(ps, build, 28, probe_rng);
    EXPECT_LE(rep.max_rel_err, 1e-5) << rep.worst_param;
}

TEST(Autodiff, GatLayerGradient) {
    ParamStore ps;
    SeededRng rng(15);
    GatSpec spec{6, 0.2};
    init_gat(ps, "gat", spec, rng);
    Tensor nodes = rng.gaussian_tensor({5, 6});
    Tensor c = probe_matrix(5, 6, 82);
    auto build = [&](Graph& g, ParamStore& p) {
        Var y = gat_apply(g, p, "gat", spec, g.input(nodes));
        return g.sum_all(g.hadamard(y, g.input(c)));
    };
    SeededRng probe_rng(10);
    auto rep = fd_check(ps, build, 48, probe_rng);
    EXPECT_LE(rep.max_rel_err, 1e-5) << rep.worst_param;
}

TEST(Autodiff, EncoderBlockGradient) {
    ParamStore ps;
    SeededRng rng(16);
    EncoderBlockSpec spec{8, 2, 16};
    init_encoder_block(ps, "blk", spec, rng);
    Tensor x = rng.gaussian_tensor({6, 8});
    Tensor c = probe_matrix(6, 8, 83);
    auto build = [&](Graph& g, ParamStore& p) {
        Var y = encoder_block_apply(g, p, "blk", spec, g.input(x));
        return g.sum_all(g.hadamard(y, g.input(c)));
    };
    SeededRng probe_rng(11);
    auto rep = fd_check(ps, build, 64, probe_rng);
    EXPECT_LE(rep.max_rel_err, 1e-5) << rep.worst_param;
}

TEST(Autodiff, ScalarOpsGradient) {
    // exp/log/sqrt/pow/scale_by composite similar to the uncertainty loss.
    ParamStore ps;
    SeededRng rng(17);
    Tensor lv({1, 1});
    lv.at(0, 0) = 0.4;
    ps.add("logvar", lv);
    ps.add("x", rng.gaussian_tensor({3, 2}));
    auto build = [&](Graph& g, ParamStore& p) {
        Var sig2 = g.exp(g.param(p, "logvar"));
        Var err = g.sqrt(g.add_scalar(g.sum_all(g.square(g.param(p, "x"))), 1e-24));
        Var term = g.scale_by(g.pow_const(sig2, -1.0), err);
        return g.add(term, g.log(sig2));
    };
    SeededRng probe_rng(12);
    auto rep = fd_check(ps, build, 24, probe_rng);
    EXPECT_LE(rep.max_rel_err, 1e-5) << rep.worst_param;
}

TEST(Autodiff, MlpForwardMatchesGraphPath) {
    ParamStore ps;
    SeededRng rng(18);
    MlpSpec spec{{4, 6, 2}};
    init_mlp(ps, "m", spec, rng);
    Tensor x = rng.gaussian_tensor({3, 4});
    Tensor plain = mlp_forward(ps, "m", spec, x);
    Graph g;
    Var y = mlp_apply(g, ps, "m", spec, g.input(x));
    EXPECT_LE(plain.max_abs_diff(g.value(y)), 1e-15);
}

TEST(Autodiff, MlpZeroWeightsGiveZeroOutput) {
    ParamStore ps;
    MlpSpec spec{{3, 4, 2}};
    SeededRng rng(19);
    init_mlp(ps, "m", spec, rng);
    for (auto& [name, t] : ps.params())
        std::fill(t.data().begin(), t.data().end(), 0.0);
    Tensor x = rng.gaussian_tensor({2, 3});
    Tensor y = mlp_forward(ps, "m", spec, x);
    for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(Autodiff, MlpReluClampsNegative) {
    ParamStore ps;
    MlpSpec spec{{2, 2, 2}};
    SeededRng rng(20);
    init_mlp(ps, "m", spec, rng);
    // Identity first layer; second layer identity too: output = relu(x).
    ps.param("m.w0") = Tensor::from_rows({{1, 0}, {0, 1}});
    ps.param("m.b0") = Tensor({1, 2});
    ps.param("m.w1") = Tensor::from_rows({{1, 0}, {0, 1}});
    ps.param("m.b1") = Tensor({1, 2});
    Tensor x = Tensor::from_rows({{-1.0, 2.0}});
    Tensor y = mlp_forward(ps, "m", spec, x);
    EXPECT_DOUBLE_EQ(y.at(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(y.at(0, 1), 2.0);
}

TEST(Autodiff, MlpSpecParamMismatchIsConfigError) {
    ParamStore ps;
    SeededRng rng(21);
    init_mlp(ps, "m", {{3, 4, 2}}, rng);
    Tensor x = rng.gaussian_tensor({2, 3});
    EXPECT_THROW(mlp_forward(ps, "m", {{3, 5, 2}}, x), ConfigError);
    EXPECT_THROW(mlp_forward(ps, "missing", {{3, 4, 2}}, x), ConfigError);
}

TEST(Autodiff, DeterministicRepeatedBackward) {
    ParamStore ps;
    SeededRng rng(22);
    MlpSpec spec{{4, 5, 1}};
    init_mlp(ps, "m", spec, rng);
    Tensor x = rng.gaussian_tensor({3, 4});
    auto run = [&] {
        ps.zero_grads();
        Graph g;
        Var loss = g.sum_all(mlp_apply(g, ps, "m", spec, g.input(x)));
        g.backward(loss);
        return ps.grad("m.w0");
    };
    Tensor g1 = run();
    Tensor g2 = run();
    EXPECT_EQ(g1.max_abs_diff(g2), 0.0);
}
