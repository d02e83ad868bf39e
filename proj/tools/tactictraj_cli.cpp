// tactictraj command-line interface: synthetic scene generation, training,
// prediction, evaluation, exact Banzhaf queries, and SVG plot emission.
//
// Exit codes: 0 success, 2 usage/config error, 3 data error, 4 numeric abort.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tactictraj/checkpoint.hpp"
#include "tactictraj/evaluate.hpp"
#include "tactictraj/kmeans.hpp"
#include "tactictraj/plot.hpp"
#include "tactictraj/synth.hpp"
#include "tactictraj/train.hpp"

namespace fs = std::filesystem;
using namespace tactictraj;

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

/// Seed precedence: explicit flag > TACTICTRAJ_SEED env > config/file value.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t file_value) {
    if (flag) return *flag;
    if (const char* env = std::getenv("TACTICTRAJ_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw ArgumentError("TACTICTRAJ_SEED is not an integer: " + std::string(env));
        }
    }
    return file_value;
}

std::string sibling_with_extension(const std::string& path, const char* ext) {
    fs::path p(path);
    p.replace_extension(ext);
    return p.string();
}

int run_gen(const std::string& config_path, std::size_t n_scenes,
            const std::optional<std::uint64_t>& seed_flag, const std::string& out_path,
            const std::string& vocab_out) {
    DatasetConfig data;
    GeneratorConfig gen;
    std::uint64_t file_seed = 7;
    if (!config_path.empty()) {
        json j = load_json_file(config_path);
        if (j.contains("dataset")) data = DatasetConfig::from_json(j["dataset"]);
        if (j.contains("generator")) gen = GeneratorConfig::from_json(j["generator"]);
        file_seed = j.value("seed", file_seed);
    }
    TacticVocabulary vocab = TacticVocabulary::default_vocabulary();
    SeededRng rng(resolve_seed(seed_flag, file_seed));
    auto scenes = synth_generate(rng, data, n_scenes, gen, vocab);
    save_scenes(out_path, scenes);
    if (!vocab_out.empty()) vocab.save(vocab_out);
    std::cout << "wrote " << scenes.size() << " scenes to " << out_path << "\n";
    return 0;
}

struct TrainFileConfig {
    DatasetConfig data;
    ModelConfig model;
    TrainConfig train;
    NormalizationParams norm;
};

TrainFileConfig parse_train_config(const std::string& path) {
    TrainFileConfig out;
    if (path.empty()) return out;
    json j = load_json_file(path);
    if (j.contains("dataset")) out.data = DatasetConfig::from_json(j["dataset"]);
    if (j.contains("model")) out.model = ModelConfig::from_json(j["model"]);
    if (j.contains("train")) out.train = TrainConfig::from_json(j["train"]);
    if (j.contains("normalization"))
        out.norm = NormalizationParams::from_json(j["normalization"]);
    return out;
}

int run_train(const std::string& data_path, const std::string& vocab_path,
              const std::string& config_path, const std::string& out_dir,
              const std::optional<std::uint64_t>& seed_flag, bool resume) {
    TrainFileConfig cfg = parse_train_config(config_path);
    const std::uint64_t seed = resolve_seed(seed_flag, cfg.train.seed);
    cfg.train.seed = seed;
    if (seed_flag || std::getenv("TACTICTRAJ_SEED")) cfg.train.model_init_seed = seed;

    TacticVocabulary vocab = vocab_path.empty() ? TacticVocabulary::default_vocabulary()
                                                : TacticVocabulary::load(vocab_path);
    cfg.data.vocab_size = vocab.size();
    auto scenes = load_scenes(data_path, cfg.data);

    Model model = Model::create(cfg.data, cfg.model, vocab, cfg.norm, cfg.train.model_init_seed);
    TrainState start_state;
    AdamState start_opt;
    const TrainState* resume_state = nullptr;
    AdamState* resume_opt = nullptr;
    if (resume) {
        auto loaded = load_checkpoint(out_dir);
        if (!loaded.extra.has_train_state) {
            throw DataError("checkpoint in " + out_dir + " carries no training state to resume");
        }
        model = std::move(loaded.model);
        cfg.train = loaded.extra.train_config;
        start_state = loaded.extra.train_state;
        start_opt = std::move(loaded.extra.adam);
        resume_state = &start_state;
        resume_opt = &start_opt;
    }

    fs::create_directories(out_dir);
    std::ofstream losses(fs::path(out_dir) / "losses.jsonl", std::ios::app);
    if (!losses) throw DataError("cannot open loss log in " + out_dir);

    auto on_epoch = [&](const EpochLog& log) {
        losses << log.to_json().dump() << "\n";
        losses.flush();
        std::cout << "stage=" << log.stage << " epoch=" << log.epoch
                  << " total=" << log.losses.at("total") << "\n";
    };
    auto checkpoint_hook = [&](const TrainState& st, const AdamState& opt) {
        CheckpointExtra extra;
        extra.train_config = cfg.train;
        extra.train_state = st;
        extra.adam = opt;
        extra.has_train_state = true;
        save_checkpoint(out_dir, model, &extra);
    };

    TrainState final_state = train_model(model, scenes, cfg.train, on_epoch, checkpoint_hook,
                                         resume_state, resume_opt);
    CheckpointExtra extra;
    extra.train_config = cfg.train;
    extra.train_state = final_state;
    extra.has_train_state = true;
    save_checkpoint(out_dir, model, &extra);
    std::cout << "checkpoint written to " << out_dir << "\n";
    return 0;
}

int run_predict(const std::string& ckpt_dir, const std::string& data_path,
                const std::string& out_path, const std::optional<std::uint64_t>& seed_flag) {
    auto loaded = load_checkpoint(ckpt_dir);
    Model& m = loaded.model;
    auto scenes = load_scenes(data_path, m.data);
    const std::uint64_t seed = resolve_seed(seed_flag, 2024);
    SeededRng rng(seed);

    std::ofstream out(out_path);
    if (!out) throw DataError("cannot write predictions: " + out_path);
    for (std::size_t idx = 0; idx < scenes.size(); ++idx) {
        SeededRng scene_rng = rng.substream(0xE7A1ULL + idx);
        Tensor preds = m.sample_trajectories(scenes[idx], scene_rng);
        auto branch = m.predict_tactics_forward(scenes[idx]);
        json samples = json::array();
        for (std::size_t s = 0; s < preds.shape()[0]; ++s) {
            json agents = json::array();
            for (std::size_t i = 0; i < preds.shape()[1]; ++i) {
                json frames = json::array();
                for (std::size_t t = 0; t < preds.shape()[2]; ++t) {
                    frames.push_back(json::array({preds[preds.offset({s, i, t, 0})],
                                                  preds[preds.offset({s, i, t, 1})]}));
                }
                agents.push_back(frames);
            }
            samples.push_back(agents);
        }
        json tactics = json::array();
        for (std::size_t j = 0; j < m.data.m_teams; ++j) {
            json probs = json::array();
            for (double v : branch.per_team[j].probabilities.data()) probs.push_back(v);
            tactics.push_back(json{{"team", j},
                                   {"topk", branch.per_team[j].top_labels},
                                   {"probs", probs}});
        }
        out << json{{"scene_id", scenes[idx].scene_id}, {"samples", samples},
                    {"tactics", tactics}}
                   .dump()
            << "\n";
    }
    std::cout << "wrote predictions for " << scenes.size() << " scenes to " << out_path << "\n";
    return 0;
}

int run_eval(const std::string& ckpt_dir, const std::string& data_path,
             const std::string& report_path, const std::optional<std::uint64_t>& seed_flag) {
    auto loaded = load_checkpoint(ckpt_dir);
    Model& m = loaded.model;
    auto scenes = load_scenes(data_path, m.data);
    const std::uint64_t seed = resolve_seed(seed_flag, 2024);
    EvalReport report = evaluate_model(m, scenes, seed);
    {
        std::ofstream out(report_path);
        if (!out) throw DataError("cannot write report: " + report_path);
        out << report.to_json().dump(2) << "\n";
    }
    {
        const std::string csv_path = sibling_with_extension(report_path, ".csv");
        std::ofstream out(csv_path);
        if (!out) throw DataError("cannot write report CSV: " + csv_path);
        out << report.to_csv();
    }
    std::cout << report.to_json().dump(2) << "\n";
    return 0;
}

int run_banzhaf(const std::string& game_path, const std::string& pair) {
    json j = load_json_file(game_path);
    CooperativeGame game = game_from_json(j);
    const auto comma = pair.find(',');
    if (comma == std::string::npos) {
        throw ArgumentError("pair must be 'i,j', got: " + pair);
    }
    std::size_t i = 0, jdx = 0;
    try {
        i = std::stoul(pair.substr(0, comma));
        jdx = std::stoul(pair.substr(comma + 1));
    } catch (const std::exception&) {
        throw ArgumentError("pair must be two integers 'i,j', got: " + pair);
    }
    const double value = banzhaf_interaction_exact(game, i, jdx);
    std::cout << std::fixed << std::setprecision(10) << value << "\n";
    return 0;
}

int run_plot(const std::string& scene_id, const std::string& data_path,
             const std::string& preds_path, const std::string& out_path) {
    // Scene files may be plotted without a full model config: parse each line
    // directly rather than validating against a dataset config.
    std::ifstream in(data_path);
    if (!in) throw DataError("cannot open scene file: " + data_path);
    std::optional<Scene> scene;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Scene s = scene_from_json(json::parse(line));
        if (s.scene_id == scene_id) {
            scene = std::move(s);
            break;
        }
    }
    if (!scene) throw DataError("scene id '" + scene_id + "' not found in " + data_path);

    Tensor preds;
    if (!preds_path.empty()) {
        std::ifstream pin(preds_path);
        if (!pin) throw DataError("cannot open predictions file: " + preds_path);
        while (std::getline(pin, line)) {
            if (line.empty()) continue;
            json j = json::parse(line);
            if (j.at("scene_id").get<std::string>() != scene_id) continue;
            const auto& samples = j.at("samples");
            const std::size_t s_count = samples.size();
            const std::size_t n = samples[0].size();
            const std::size_t t = samples[0][0].size();
            preds = Tensor({s_count, n, t, 2});
            for (std::size_t s = 0; s < s_count; ++s)
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t f = 0; f < t; ++f) {
                        preds[preds.offset({s, i, f, 0})] = samples[s][i][f][0].get<double>();
                        preds[preds.offset({s, i, f, 1})] = samples[s][i][f][1].get<double>();
                    }
            break;
        }
    }
    DatasetConfig defaults;
    plot_emit(*scene, preds, defaults.court_extent, out_path,
              sibling_with_extension(out_path, ".csv"));
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tactictraj: tactic-conditioned multi-agent trajectory prediction"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate synthetic scripted scenes");
    std::string gen_config, gen_out = "scenes.jsonl", gen_vocab_out;
    std::size_t gen_n = 100;
    std::optional<std::uint64_t> gen_seed;
    gen->add_option("--config", gen_config, "generator config JSON (dataset/generator/seed)");
    gen->add_option("--scenes", gen_n, "number of scenes");
    gen->add_option("--seed", gen_seed, "RNG seed (overrides env and config)");
    gen->add_option("--out", gen_out, "output scenes.jsonl")->required();
    gen->add_option("--vocab-out", gen_vocab_out, "also write the default vocabulary JSON here");

    // train
    auto* train = app.add_subcommand("train", "Train the two-branch model");
    std::string train_data, train_vocab, train_config, train_out;
    std::optional<std::uint64_t> train_seed;
    bool train_resume = false;
    train->add_option("--data", train_data, "training scenes.jsonl")->required();
    train->add_option("--vocab", train_vocab, "vocabulary.json");
    train->add_option("--config", train_config, "train config JSON (dataset/model/train sections)");
    train->add_option("--out", train_out, "checkpoint directory")->required();
    train->add_option("--seed", train_seed,
                      "seed override (flag > TACTICTRAJ_SEED > config). Note: the tactic-branch "
                      "weight alpha_w defaults to 1.0; the source text's 'tactic prediction rate "
                      "... 1000' has no defined referent and is not applied silently.");
    train->add_flag("--resume", train_resume, "resume from the checkpoint in --out");

    // predict
    auto* predict = app.add_subcommand("predict", "Sample future trajectories per scene");
    std::string pred_ckpt, pred_data, pred_out;
    std::optional<std::uint64_t> pred_seed;
    predict->add_option("--ckpt", pred_ckpt, "checkpoint directory")->required();
    predict->add_option("--data", pred_data, "scenes.jsonl")->required();
    predict->add_option("--out", pred_out, "output predictions JSONL")->required();
    predict->add_option("--seed", pred_seed, "sampling seed");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate displacement and tactic metrics");
    std::string eval_ckpt, eval_data, eval_report;
    std::optional<std::uint64_t> eval_seed;
    eval->add_option("--ckpt", eval_ckpt, "checkpoint directory")->required();
    eval->add_option("--data", eval_data, "scenes.jsonl")->required();
    eval->add_option("--report", eval_report, "output report JSON (CSV written alongside)")
        ->required();
    eval->add_option("--seed", eval_seed, "sampling seed");

    // banzhaf
    auto* banzhaf = app.add_subcommand("banzhaf", "Exact Banzhaf interaction of a pair");
    std::string game_path, pair;
    banzhaf->add_option("--game", game_path, "tabular game JSON {n, phi}")->required();
    banzhaf->add_option("--pair", pair, "player pair i,j")->required();

    // plot
    auto* plot = app.add_subcommand("plot", "Emit SVG + CSV for one scene");
    std::string plot_scene, plot_data, plot_preds, plot_out;
    plot->add_option("--scene", plot_scene, "scene id")->required();
    plot->add_option("--data", plot_data, "scenes.jsonl")->required();
    plot->add_option("--preds", plot_preds, "predictions JSONL (optional)");
    plot->add_option("--out", plot_out, "output SVG path")->required();

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return run_gen(gen_config, gen_n, gen_seed, gen_out, gen_vocab_out);
        if (train->parsed())
            return run_train(train_data, train_vocab, train_config, train_out, train_seed,
                             train_resume);
        if (predict->parsed()) return run_predict(pred_ckpt, pred_data, pred_out, pred_seed);
        if (eval->parsed()) return run_eval(eval_ckpt, eval_data, eval_report, eval_seed);
        if (banzhaf->parsed()) return run_banzhaf(game_path, pair);
        if (plot->parsed()) return run_plot(plot_scene, plot_data, plot_preds, plot_out);
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    } catch (const ArgumentError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return 2;
    } catch (const VocabularyError& e) {
        std::cerr << "vocabulary error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric abort: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
