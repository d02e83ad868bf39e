// Acceptance suite: runs every release criterion end to end and prints one
// PASS/FAIL line per check. Exit code 0 iff all checks pass.
//
//   acceptance [--only <numeric|diffusion|coopgame|loss|metrics|e2e|determinism>]

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "support/banzhaf_alt.hpp"
#include "support/fd_check.hpp"
#include "tactictraj/checkpoint.hpp"
#include "tactictraj/evaluate.hpp"
#include "tactictraj/plot.hpp"
#include "tactictraj/synth.hpp"
#include "tactictraj/train.hpp"

using namespace tactictraj;
using tactictraj::testing::fd_check;

namespace {

int g_failures = 0;

void check(bool ok, const std::string& name, const std::string& detail) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << ": " << detail << "\n";
    std::cout.flush();
    if (!ok) ++g_failures;
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << std::fixed << v;
    return os.str();
}

// ---- numeric suite ------------------------------------------------------------

void run_numeric() {
    const auto start = std::chrono::steady_clock::now();

    SeededRng rng(101);
    double worst_row_sum = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        Tensor x = rng.gaussian_tensor({1 + rng.uniform_index(6), 1 + rng.uniform_index(9)});
        for (double& v : x.data()) v *= 100.0;
        Tensor y = softmax_rows(x);
        for (std::size_t i = 0; i < y.rows(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < y.cols(); ++j) s += y.at(i, j);
            worst_row_sum = std::max(worst_row_sum, std::abs(s - 1.0));
        }
    }
    check(worst_row_sum <= 1e-12, "numeric/softmax-row-sums",
          "max |row sum - 1| = " + std::to_string(worst_row_sum));

    bool hull_ok = true;
    for (int rep = 0; rep < 100 && hull_ok; ++rep) {
        Tensor q = rng.gaussian_tensor({4, 3});
        Tensor k = rng.gaussian_tensor({5, 3});
        Tensor v = rng.gaussian_tensor({5, 2});
        Tensor out = scaled_dot_attention(q, k, v);
        for (std::size_t j = 0; j < 2 && hull_ok; ++j) {
            double lo = v.at(0, j), hi = v.at(0, j);
            for (std::size_t i = 1; i < 5; ++i) {
                lo = std::min(lo, v.at(i, j));
                hi = std::max(hi, v.at(i, j));
            }
            for (std::size_t i = 0; i < 4; ++i) {
                hull_ok &= out.at(i, j) >= lo - 1e-12 && out.at(i, j) <= hi + 1e-12;
            }
        }
    }
    check(hull_ok, "numeric/attention-convex-hull", "100 random instances inside value hull");

    // Finite-difference sweep over every layer type.
    double worst_fd = 0.0;
    std::string worst_layer = "none";
    auto fd_layer = [&](const std::string& name, ParamStore& ps,
                        const tactictraj::testing::LossBuilder& build) {
        SeededRng probe(7);
        auto rep = fd_check(ps, build, 64, probe);
        if (rep.max_rel_err > worst_fd) {
            worst_fd = rep.max_rel_err;
            worst_layer = name + "/" + rep.worst_param;
        }
    };
    {
        ParamStore ps;
        SeededRng r(1);
        MlpSpec spec{{5, 8, 3}};
        init_mlp(ps, "mlp", spec, r);
        for (double& v : ps.param("mlp.b0").data()) v = 0.3;
        Tensor x = r.gaussian_tensor({4, 5});
        Tensor c = r.gaussian_tensor({4, 3});
        fd_layer("mlp", ps, [&](Graph& g, ParamStore& p) {
            return g.sum_all(g.hadamard(mlp_apply(g, p, "mlp", spec, g.input(x)), g.input(c)));
        });
    }
    {
        ParamStore ps;
        SeededRng r(2);
        ps.add("x", r.gaussian_tensor({3, 6}));
        Tensor c = r.gaussian_tensor({3, 6});
        fd_layer("softmax", ps, [&](Graph& g, ParamStore& p) {
            return g.sum_all(g.hadamard(g.softmax_rows(g.param(p, "x")), g.input(c)));
        });
    }
    {
        ParamStore ps;
        SeededRng r(3);
        ps.add("wq", r.gaussian_tensor({4, 4}));
        ps.add("wk", r.gaussian_tensor({4, 4}));
        ps.add("wv", r.gaussian_tensor({4, 4}));
        Tensor x = r.gaussian_tensor({5, 4});
        Tensor c = r.gaussian_tensor({5, 4});
        fd_layer("attention", ps, [&](Graph& g, ParamStore& p) {
            Var xi = g.input(x);
            return g.sum_all(g.hadamard(
                attention_apply(g, g.matmul(xi, g.param(p, "wq")), g.matmul(xi, g.param(p, "wk")),
                                g.matmul(xi, g.param(p, "wv"))),
                g.input(c)));
        });
    }
    {
        ParamStore ps;
        SeededRng r(4);
        ps.add("x", r.gaussian_tensor({4, 6}));
        init_layer_norm(ps, "ln", 6);
        Tensor c = r.gaussian_tensor({4, 6});
        fd_layer("layer_norm", ps, [&](Graph& g, ParamStore& p) {
            return g.sum_all(g.hadamard(layer_norm_apply(g, p, "ln", g.param(p, "x")), g.input(c)));
        });
    }
    {
        ParamStore ps;
        SeededRng r(5);
        EncoderBlockSpec spec{8, 2, 16};
        init_encoder_block(ps, "blk", spec, r);
        Tensor x = r.gaussian_tensor({6, 8});
        Tensor c = r.gaussian_tensor({6, 8});
        fd_layer("encoder_block", ps, [&](Graph& g, ParamStore& p) {
            return g.sum_all(
                g.hadamard(encoder_block_apply(g, p, "blk", spec, g.input(x)), g.input(c)));
        });
    }
    {
        ParamStore ps;
        SeededRng r(6);
        GatSpec spec{6, 0.2};
        init_gat(ps, "gat", spec, r);
        Tensor x = r.gaussian_tensor({5, 6});
        Tensor c = r.gaussian_tensor({5, 6});
        fd_layer("gat", ps, [&](Graph& g, ParamStore& p) {
            return g.sum_all(g.hadamard(gat_apply(g, p, "gat", spec, g.input(x)), g.input(c)));
        });
    }
    {
        ParamStore ps;
        SeededRng r(8);
        ps.add("emb", r.gaussian_tensor({7, 4}));
        Tensor c = r.gaussian_tensor({3, 4});
        fd_layer("embedding", ps, [&](Graph& g, ParamStore& p) {
            return g.sum_all(
                g.hadamard(g.gather_rows(g.param(p, "emb"), {2, 5, 2}), g.input(c)));
        });
    }
    check(worst_fd <= 1e-5, "numeric/layer-gradients-vs-finite-differences",
          "max rel err = " + std::to_string(worst_fd) + " at " + worst_layer);

    const double secs = elapsed_s(start);
    check(secs < 30.0, "numeric/runtime", fmt(secs, 2) + " s < 30 s");
}

// ---- diffusion suite ---------------------------------------------------------

void run_diffusion() {
    const auto start = std::chrono::steady_clock::now();

    auto sched = NoiseSchedule::linear(100, 1e-4, 0.05);
    double worst = 0.0;
    for (std::size_t t = 1; t < sched.t_steps; ++t) {
        worst = std::max(worst, std::abs(sched.alpha_bar[t] - sched.alpha_bar[t - 1] * sched.alpha[t]));
    }
    check(worst <= 1e-12, "diffusion/schedule-consistency",
          "max |abar_t - abar_{t-1} a_t| = " + std::to_string(worst));

    {
        SeededRng rng(202);
        const double y0 = 1.5;
        Tensor y0t = Tensor::scalar(y0);
        const int n = 10000;
        double msum = 0.0, msum2 = 0.0, csum = 0.0, csum2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double vm = forward_diffuse_marginal(y0t, 99, sched, rng)[0];
            msum += vm;
            msum2 += vm * vm;
            double vc = y0;
            for (std::size_t t = 0; t < sched.t_steps; ++t) {
                vc = std::sqrt(1.0 - sched.beta[t]) * vc + std::sqrt(sched.beta[t]) * rng.gaussian();
            }
            csum += vc;
            csum2 += vc * vc;
        }
        const double m_mean = msum / n, c_mean = csum / n;
        const double m_var = msum2 / n - m_mean * m_mean;
        const double c_var = csum2 / n - c_mean * c_mean;
        const bool ok = std::abs(m_mean - c_mean) < 0.03 &&
                        std::abs(m_var - c_var) < 0.03 * std::max(m_var, c_var);
        check(ok, "diffusion/chain-vs-marginal",
              "mean " + fmt(m_mean) + " vs " + fmt(c_mean) + ", var " + fmt(m_var) + " vs " +
                  fmt(c_var) + " (1e4 draws, 3%)");
    }

    {
        SeededRng rng(203);
        Tensor y = rng.gaussian_tensor({3, 5});
        Tensor gc = rng.gaussian_tensor({3, 2});
        Tensor ac = rng.gaussian_tensor({3, 2});
        NoiseEstimator f = [](const Tensor& yy, const Tensor& cond, long t) {
            double cm = 0.0;
            for (double v : cond.data()) cm += v;
            Tensor out = yy;
            for (std::size_t i = 0; i < out.numel(); ++i)
                out[i] = 0.4 * out[i] + cm + 0.02 * static_cast<double>(t);
            return out;
        };
        Tensor at0 = guided_noise(f, y, gc, ac, 3, 0.0);
        Tensor at1 = guided_noise(f, y, gc, ac, 3, 1.0);
        double worst_blend = 0.0;
        for (double s_g : {0.1, 0.7, 1.9}) {
            Tensor got = guided_noise(f, y, gc, ac, 3, s_g);
            Tensor expect = add(at0, scale(sub(at1, at0), s_g));
            worst_blend = std::max(worst_blend, got.max_abs_diff(expect));
        }
        check(worst_blend <= 1e-12, "diffusion/guided-noise-affine-identity",
              "max blend deviation = " + std::to_string(worst_blend));
    }

    {
        auto s = NoiseSchedule::from_betas({1.0 - 0.9 / 0.99, 0.01});
        Tensor out = denoise_step_deterministic(Tensor::scalar(1.0), Tensor::scalar(0.5), 1, s);
        const double expected = (1.0 - (0.01 / std::sqrt(0.1)) * 0.5) / std::sqrt(0.99);
        check(std::abs(out[0] - expected) <= 1e-9, "diffusion/denoise-step-hand-case",
              "got " + std::to_string(out[0]) + ", expected " + std::to_string(expected));
    }

    const double secs = elapsed_s(start);
    check(secs < 60.0, "diffusion/runtime", fmt(secs, 2) + " s < 60 s");
}

// ---- cooperative-game suite -----------------------------------------------------

CooperativeGame additive_game(const std::vector<double>& w) {
    CooperativeGame g;
    g.n_players = w.size();
    g.phi = [w](std::uint64_t mask) {
        double s = 0.0;
        for (std::size_t p = 0; p < w.size(); ++p)
            if (mask & (1ULL << p)) s += w[p];
        return s;
    };
    return g;
}

void run_coopgame() {
    SeededRng rng(303);
    double worst_additive = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 3 + rng.uniform_index(8);  // n <= 10
        std::vector<double> w(n);
        for (double& v : w) v = 5.0 * rng.gaussian();
        auto game = additive_game(w);
        const std::size_t i = rng.uniform_index(n);
        std::size_t j = (i + 1 + rng.uniform_index(n - 1)) % n;
        worst_additive = std::max(worst_additive, std::abs(banzhaf_interaction_exact(game, i, j)));
    }
    check(worst_additive <= 1e-10, "coopgame/additive-zero-interaction",
          "100 random weight vectors, max |I| = " + std::to_string(worst_additive));

    double worst_pair = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 4 + rng.uniform_index(7);
        std::vector<double> w(n);
        for (double& v : w) v = rng.gaussian();
        std::vector<double> syn(n * n);
        for (double& v : syn) v = 0.3 * rng.gaussian();
        CooperativeGame game;
        game.n_players = n;
        game.phi = [n, w, syn](std::uint64_t mask) {
            double s = 0.0;
            for (std::size_t a = 0; a < n; ++a) {
                if (!(mask & (1ULL << a))) continue;
                s += w[a];
                for (std::size_t b = a + 1; b < n; ++b)
                    if (mask & (1ULL << b)) s += syn[a * n + b];
            }
            return s;
        };
        const std::size_t i = rng.uniform_index(n);
        const std::size_t j = (i + 1 + rng.uniform_index(n - 1)) % n;
        worst_pair = std::max(worst_pair,
                              std::abs(banzhaf_interaction_exact(game, i, j) -
                                       tactictraj::testing::banzhaf_interaction_marginal(game, i, j)));
    }
    check(worst_pair <= 1e-10, "coopgame/two-implementation-agreement",
          "max |direct - marginal| = " + std::to_string(worst_pair));

    {
        CooperativeGame g;
        g.n_players = 3;
        g.phi = [](std::uint64_t mask) { return (mask & 0b11ULL) == 0b11ULL ? 1.0 : 0.0; };
        const double v = banzhaf_interaction_exact(g, 0, 1);
        check(v == 1.0, "coopgame/unanimity-exact-one", "I(0,1) = " + std::to_string(v));
    }

    {
        const auto start = std::chrono::steady_clock::now();
        std::vector<double> w(20);
        SeededRng r(9);
        for (double& v : w) v = r.gaussian();
        CooperativeGame g;
        g.n_players = 20;
        g.phi = [w](std::uint64_t mask) {
            double s = 0.0;
            for (std::size_t p = 0; p < 20; ++p)
                if (mask & (1ULL << p)) s += w[p] + 0.01 * static_cast<double>(p);
            return s + ((mask & 0b110ULL) == 0b110ULL ? 2.0 : 0.0);
        };
        const double v = banzhaf_interaction_exact(g, 1, 2);
        const double secs = elapsed_s(start);
        check(std::abs(v - 2.0) <= 1e-9 && secs < 10.0, "coopgame/n20-single-pair-under-10s",
              "I(1,2) = " + fmt(v) + " in " + fmt(secs, 2) + " s");
    }

    {
        Tensor s = Tensor::full({6, 5}, 1.3);
        auto targets = masked_interaction(s, {1, 1.0, 0});
        const double expected = (1.0 / 5.0 + 1.0 / 6.0) / 2.0;
        double worst_u = 0.0;
        for (double v : targets.i_b.data()) worst_u = std::max(worst_u, std::abs(v - expected));
        check(worst_u <= 1e-12, "coopgame/masked-uniform-full-mask",
              "max |I_B - (1/k + 1/N_T)/2| = " + std::to_string(worst_u));
    }
}

// ---- loss suite -----------------------------------------------------------------

void run_loss() {
    {
        SeededRng rng(404);
        double worst = 0.0;
        for (int rep = 0; rep < 50; ++rep) {
            Tensor logits = rng.gaussian_tensor({1, 8});
            Tensor p = softmax_rows(logits);
            const int y = static_cast<int>(rng.uniform_index(8));
            FocalConfig ce{Tensor(), 0.0};
            worst = std::max(worst, std::abs(focal_loss(p, y, ce) + std::log(p[y])));
        }
        check(worst <= 1e-12, "loss/focal-gamma0-equals-cross-entropy",
              "max |focal - CE| = " + std::to_string(worst));
    }
    {
        Tensor p = Tensor::row({0.5, 0.5});
        FocalConfig cfg{Tensor(), 4.0};
        const double v = focal_loss(p, 0, cfg);
        check(std::abs(v - 0.0433) <= 1e-4, "loss/focal-gamma4-half",
              "focal(gamma=4, p=0.5) = " + fmt(v, 6));
    }
    {
        SeededRng rng(405);
        Tensor truth = rng.gaussian_tensor({3, 4});
        std::vector<Tensor> preds;
        double sum_err = 0.0;
        for (int s = 0; s < 6; ++s) {
            preds.push_back(rng.gaussian_tensor({3, 4}));
            sum_err += frobenius_norm(sub(truth, preds.back()));
        }
        const double mean_err = sum_err / 6.0;
        auto unc_at = [&](double sigma2) {
            return loss_dist_unc(preds, truth, std::sqrt(sigma2)).second;
        };
        const double h = 1e-6 * mean_err;
        const double deriv = (unc_at(mean_err + h) - unc_at(mean_err - h)) / (2.0 * h);
        check(std::abs(deriv) <= 1e-6, "loss/unc-stationary-at-mean-error",
              "dL/dsigma2 at sigma2=mean err = " + std::to_string(deriv));
    }
    {
        SeededRng rng(406);
        Tensor truth = rng.gaussian_tensor({2, 6});
        std::vector<Tensor> preds = {rng.gaussian_tensor({2, 6}), truth,
                                     rng.gaussian_tensor({2, 6})};
        const double dist = loss_dist_unc(preds, truth, 1.0).first;
        check(dist == 0.0, "loss/dist-zero-when-truth-sampled", "L_dist = " + std::to_string(dist));
    }
}

// ---- metrics suite ----------------------------------------------------------------

void run_metrics() {
    {
        Tensor truth({2, 10, 2});
        SeededRng rng(507);
        for (double& v : truth.data()) v = rng.gaussian();
        Tensor pred({1, 2, 10, 2});
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t f = 0; f < 10; ++f) {
                pred[pred.offset({0, i, f, 0})] = truth[truth.offset({i, f, 0})] + 3.0;
                pred[pred.offset({0, i, f, 1})] = truth[truth.offset({i, f, 1})] + 4.0;
            }
        const double ade = min_ade(pred, truth, 10);
        const double fde = min_fde(pred, truth, 10);
        check(ade == 5.0 && fde == 5.0, "metrics/constant-offset-five",
              "ADE = " + fmt(ade) + ", FDE = " + fmt(fde));
    }
    {
        SeededRng rng(508);
        std::vector<std::vector<int>> preds;
        std::vector<int> truths;
        for (int i = 0; i < 200; ++i) {
            std::vector<int> order(16);
            std::iota(order.begin(), order.end(), 0);
            rng.shuffle(order);
            preds.push_back(order);
            truths.push_back(static_cast<int>(rng.uniform_index(16)));
        }
        bool monotone = true;
        double prev = 0.0;
        for (std::size_t k = 1; k <= 16; ++k) {
            const double acc = topk_accuracy(preds, truths, k);
            monotone &= acc >= prev - 1e-15;
            prev = acc;
        }
        const double top_v = topk_accuracy(preds, truths, 16);
        check(monotone && top_v == 1.0, "metrics/topk-monotone-and-topv-one",
              "Top-16 = " + fmt(top_v));
    }
    {
        // Uniform random head over V = 16 classes, 4000 team-scenes.
        SeededRng rng(509);
        std::vector<std::vector<int>> preds;
        std::vector<int> truths;
        for (int i = 0; i < 4000; ++i) {
            std::vector<int> order(16);
            std::iota(order.begin(), order.end(), 0);
            rng.shuffle(order);
            preds.push_back(order);
            truths.push_back(static_cast<int>(rng.uniform_index(16)));
        }
        const double top1 = topk_accuracy(preds, truths, 1);
        check(std::abs(top1 - 1.0 / 16.0) <= 0.02, "metrics/random-head-top1-chance",
              "Top-1 = " + fmt(top1) + " vs 1/16 = " + fmt(1.0 / 16.0));
    }
}

// ---- end-to-end synthetic benchmark -------------------------------------------------

struct BenchmarkSetup {
    DatasetConfig data;
    GeneratorConfig gen;
    ModelConfig model;
    TrainConfig train;
    std::vector<int> offense_ids{0, 1, 2, 3};
    std::vector<int> defense_ids{7, 8, 14, 15};
};

BenchmarkSetup benchmark_setup() {
    BenchmarkSetup b;
    b.model.d_model = 48;
    b.model.enc_layers = 1;
    b.model.enc_heads = 2;
    b.model.d_a = 48;
    b.model.d_c = 16;
    b.model.den_width = 64;
    b.model.den_blocks = 1;
    b.model.den_heads = 2;
    b.model.init_hidden = 96;
    b.model.n_samples = 20;
    b.model.enh_d_k = 32;
    b.model.lrn_hidden = 96;
    b.model.k_top = 5;
    b.model.head_hidden = 64;
    b.model.sim_d_s = 16;
    b.model.sim_gain = 1.2;
    b.model.t_steps = 100;
    b.model.denoise_steps_used = 5;
    b.model.dist_loss_target = "initializer";

    b.train.epochs_denoiser = 24;
    b.train.epochs_tactic = 12;
    b.train.epochs_banzhaf = 64;
    b.train.lr_banzhaf = 1e-3;
    b.train.epochs_joint = 6;
    b.train.keep_prob_joint = 0.85;
    b.train.batch_size = 32;
    b.train.seed = 20240915;
    b.train.model_init_seed = 41;
    b.train.n_mask_samples = 16;
    return b;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    auto ranks = [](const std::vector<double>& x) {
        std::vector<std::size_t> order(x.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t u, std::size_t v) {
            return x[u] < x[v];
        });
        std::vector<double> r(x.size());
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i;
            while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    return num / std::sqrt(da * db);
}

void run_e2e() {
    const auto start = std::chrono::steady_clock::now();
    BenchmarkSetup b = benchmark_setup();

    SeededRng gen_rng_train(1001), gen_rng_test(2002);
    auto train_scenes = synth_generate(gen_rng_train, b.data, 500, b.gen);
    auto test_scenes = synth_generate(gen_rng_test, b.data, 200, b.gen);

    Model model = Model::create(b.data, b.model, TacticVocabulary::default_vocabulary(),
                                NormalizationParams{}, b.train.model_init_seed);
    double first_total = 0.0, last_total = 0.0;
    std::size_t n_epochs = 0;
    train_model(model, train_scenes, b.train, [&](const EpochLog& log) {
        if (n_epochs == 0) first_total = log.losses.at("total");
        last_total = log.losses.at("total");
        ++n_epochs;
        std::cout << "  [e2e] stage=" << log.stage << " epoch=" << log.epoch
                  << " total=" << fmt(log.losses.at("total")) << " noise="
                  << fmt(log.losses.at("noise")) << " dist=" << fmt(log.losses.at("dist"))
                  << " tactic=" << fmt(log.losses.at("tactic")) << " bi="
                  << fmt(log.losses.at("bi"), 6) << "\n";
    });
    std::cout << "  [e2e] training done in " << fmt(elapsed_s(start), 1) << " s\n";

    // (a) best-of-20 minADE at 4 s vs 0.5x constant-velocity baseline.
    EvalReport report = evaluate_model(model, test_scenes, 31337);
    double cv_sum = 0.0;
    for (const auto& s : test_scenes) {
        Tensor cv = constant_velocity_baseline(s, b.data.t_obs, b.data.t_pred);
        cv_sum += min_ade(cv, truth_tensor(s, b.data.t_obs, b.data.t_pred), b.data.t_pred);
    }
    const double cv_ade = cv_sum / static_cast<double>(test_scenes.size());
    const double model_ade = report.min_ade_by_horizon.at("4.0");
    check(model_ade <= 0.5 * cv_ade, "e2e/minade-beats-half-constant-velocity",
          "model minADE@4s = " + fmt(model_ade) + " m vs 0.5 x CV " + fmt(cv_ade) + " = " +
              fmt(0.5 * cv_ade) + " m");

    // (b) Top-1 tactic accuracy >= 3x chance with 8 active classes.
    const double top1 = report.topk.at("1");
    check(top1 >= 0.375, "e2e/top1-at-least-3x-chance",
          "Top-1 = " + fmt(top1) + " (threshold 0.375); Top-5 = " + fmt(report.topk.at("5")));

    // (c) conditioning fidelity: true vs uniformly mismatched observed labels.
    {
        std::vector<double> ade_true(test_scenes.size()), ade_mis(test_scenes.size());
        SeededRng rngs(31337);
        SeededRng mis_rng(662);
        for (std::size_t idx = 0; idx < test_scenes.size(); ++idx) {
            SeededRng scene_rng = rngs.substream(0xE7A1ULL + idx);
            SeededRng scene_rng2 = scene_rng;  // identical stream for the paired run
            Tensor truth = truth_tensor(test_scenes[idx], b.data.t_obs, b.data.t_pred);
            Tensor preds = model.sample_trajectories(test_scenes[idx], scene_rng);
            ade_true[idx] = min_ade(preds, truth, b.data.t_pred);

            Scene mismatched = test_scenes[idx];
            for (auto& t : mismatched.tactics) {
                const auto& side_ids =
                    model.vocab.entry(t.observed).side == "offense" ? b.offense_ids
                                                                    : b.defense_ids;
                std::vector<int> others;
                for (int id : side_ids)
                    if (id != t.observed) others.push_back(id);
                t.observed = others[mis_rng.uniform_index(others.size())];
            }
            Tensor preds_mis = model.sample_trajectories(mismatched, scene_rng2);
            ade_mis[idx] = min_ade(preds_mis, truth, b.data.t_pred);
        }
        double mean_true = 0.0, mean_mis = 0.0;
        std::vector<double> diff(test_scenes.size());
        for (std::size_t i = 0; i < diff.size(); ++i) {
            diff[i] = ade_mis[i] - ade_true[i];
            mean_true += ade_true[i];
            mean_mis += ade_mis[i];
        }
        mean_true /= static_cast<double>(diff.size());
        mean_mis /= static_cast<double>(diff.size());

        SeededRng boot(40404);
        const int n_boot = 2000;
        int favorable = 0;
        for (int rep = 0; rep < n_boot; ++rep) {
            double m = 0.0;
            for (std::size_t i = 0; i < diff.size(); ++i)
                m += diff[boot.uniform_index(diff.size())];
            if (m > 0.0) ++favorable;
        }
        const double frac = static_cast<double>(favorable) / n_boot;
        check(mean_true < mean_mis && frac >= 0.95, "e2e/conditioning-fidelity",
              "minADE true = " + fmt(mean_true) + " < mismatched = " + fmt(mean_mis) + "; " +
                  fmt(100.0 * frac, 1) + "% of bootstrap resamples favor the true condition");
    }

    // (d) learner: held-out L_bi halves from its re-initialized value and
    // I_pred correlates with the oracle I_B (Spearman >= 0.6).
    {
        Model fresh = Model::create(b.data, b.model, TacticVocabulary::default_vocabulary(),
                                    NormalizationParams{}, b.train.model_init_seed);
        Model init_learner = model;  // trained everywhere except the learner
        for (auto& [name, t] : init_learner.params.params()) {
            if (name.rfind("lrn.", 0) == 0) t = fresh.params.param(name);
        }

        double loss_trained = 0.0, loss_init = 0.0;
        std::vector<double> pooled_pred, pooled_oracle;
        for (const auto& scene : test_scenes) {
            auto fwd = model.predict_tactics_forward(scene);
            auto fwd_init = init_learner.predict_tactics_forward(scene);
            std::vector<Tensor> targets;
            for (std::size_t j = 0; j < b.data.m_teams; ++j) {
                targets.push_back(model.oracle_targets(fwd.enhanced_tokens[j],
                                                       fwd.per_team[j].top_embeddings,
                                                       {1, 1.0, 0}));
                for (std::size_t e = 0; e < targets.back().numel(); ++e) {
                    pooled_pred.push_back(fwd.interaction_pred[j][e]);
                    pooled_oracle.push_back(targets.back()[e]);
                }
            }
            loss_trained += loss_bi(fwd.interaction_pred, targets);
            loss_init += loss_bi(fwd_init.interaction_pred, targets);
        }
        const double rho = spearman(pooled_pred, pooled_oracle);
        const bool halved = loss_trained <= 0.5 * loss_init;
        check(halved && rho >= 0.6, "e2e/banzhaf-learner-fits-oracle",
              "held-out L_bi " + fmt(loss_trained) + " vs init " + fmt(loss_init) +
                  " (need <= 50%), Spearman = " + fmt(rho));
    }

    check(last_total < first_total, "e2e/training-loss-decreases",
          "epoch-mean total " + fmt(first_total) + " -> " + fmt(last_total));

    const double secs = elapsed_s(start);
    check(secs < 1200.0, "e2e/runtime-within-20min", fmt(secs, 1) + " s < 1200 s");
}

// ---- determinism -----------------------------------------------------------------

void run_determinism() {
    namespace fs = std::filesystem;
    auto read_file = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };

    auto pipeline = [&](const std::string& dir) {
        fs::create_directories(dir);
        DatasetConfig data;
        GeneratorConfig gen;
        SeededRng gen_rng(777);
        auto scenes = synth_generate(gen_rng, data, 40, gen);
        save_scenes(dir + "/scenes.jsonl", scenes);

        ModelConfig mc;
        mc.d_model = 24;
        mc.enc_layers = 1;
        mc.enc_heads = 2;
        mc.d_a = 24;
        mc.d_c = 8;
        mc.den_width = 32;
        mc.den_blocks = 1;
        mc.den_heads = 2;
        mc.init_hidden = 24;
        mc.n_samples = 8;
        mc.enh_d_k = 16;
        mc.lrn_hidden = 16;
        mc.k_top = 5;
        mc.head_hidden = 24;
        mc.sim_d_s = 8;
        mc.t_steps = 50;
        mc.denoise_steps_used = 3;
        mc.dist_loss_target = "initializer";

        TrainConfig tc;
        tc.epochs_denoiser = 1;
        tc.epochs_tactic = 1;
        tc.epochs_banzhaf = 0;
        tc.epochs_joint = 0;
        tc.batch_size = 16;
        tc.seed = 99;
        tc.model_init_seed = 7;
        tc.n_mask_samples = 4;

        auto loaded = load_scenes(dir + "/scenes.jsonl", data);
        Model m = Model::create(data, mc, TacticVocabulary::default_vocabulary(),
                                NormalizationParams{}, tc.model_init_seed);
        train_model(m, loaded, tc, nullptr);
        CheckpointExtra extra;
        extra.train_config = tc;
        extra.has_train_state = false;
        save_checkpoint(dir + "/ckpt", m, &extra);
        EvalReport report = evaluate_model(m, loaded, 4242);
        std::ofstream(dir + "/report.json") << report.to_json().dump(2) << "\n";
    };

    const std::string base = std::string(fs::temp_directory_path()) + "/tactictraj_determinism";
    fs::remove_all(base);
    pipeline(base + "/run1");
    pipeline(base + "/run2");

    const bool scenes_same =
        read_file(base + "/run1/scenes.jsonl") == read_file(base + "/run2/scenes.jsonl");
    const bool params_same = read_file(base + "/run1/ckpt/params.bin") ==
                             read_file(base + "/run2/ckpt/params.bin");
    const bool manifest_same = read_file(base + "/run1/ckpt/manifest.json") ==
                               read_file(base + "/run2/ckpt/manifest.json");
    const bool report_same =
        read_file(base + "/run1/report.json") == read_file(base + "/run2/report.json");
    check(scenes_same && params_same && manifest_same && report_same,
          "determinism/pipeline-byte-identical",
          std::string("scenes=") + (scenes_same ? "ok" : "DIFF") + " params=" +
              (params_same ? "ok" : "DIFF") + " manifest=" + (manifest_same ? "ok" : "DIFF") +
              " report=" + (report_same ? "ok" : "DIFF"));
}

}  // namespace

int main(int argc, char** argv) {
    std::string only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = argv[++i];
    }
    auto want = [&](const char* name) { return only.empty() || only == name; };

    if (want("numeric")) run_numeric();
    if (want("diffusion")) run_diffusion();
    if (want("coopgame")) run_coopgame();
    if (want("loss")) run_loss();
    if (want("metrics")) run_metrics();
    if (want("e2e")) run_e2e();
    if (want("determinism")) run_determinism();

    if (g_failures == 0) {
        std::cout << "acceptance: all checks passed\n";
        return 0;
    }
    std::cout << "acceptance: " << g_failures << " check(s) FAILED\n";
    return 1;
}
