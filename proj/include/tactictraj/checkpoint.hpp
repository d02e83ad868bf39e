#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tactictraj/model.hpp"
#include "tactictraj/train.hpp"

namespace tactictraj {

/// Checkpoint layout: <dir>/manifest.json + <dir>/params.bin.
/// The manifest carries the full config snapshot and a parameter index whose
/// byte offsets tile the blob exactly; the blob is little-endian f64 (or f32
/// when requested, which is a documented lossy down-cast). Optimizer moments
/// are stored under "opt.m/" and "opt.v/" names when training state is saved.

namespace ckpt_detail {

inline void write_le64(std::ofstream& out, std::uint64_t bits) {
    unsigned char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xFF);
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

inline void write_le32(std::ofstream& out, std::uint32_t bits) {
    unsigned char bytes[4];
    for (int b = 0; b < 4; ++b) bytes[b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xFF);
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

inline std::uint64_t read_le64(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | bytes[b];
    return bits;
}

inline std::uint32_t read_le32(std::istream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    std::uint32_t bits = 0;
    for (int b = 3; b >= 0; --b) bits = (bits << 8) | bytes[b];
    return bits;
}

inline void write_tensor(std::ofstream& out, const Tensor& t, const std::string& dtype) {
    if (dtype == "f64") {
        for (double v : t.data()) write_le64(out, std::bit_cast<std::uint64_t>(v));
    } else if (dtype == "f32") {
        for (double v : t.data())
            write_le32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    } else {
        throw ConfigError("unsupported checkpoint dtype: " + dtype);
    }
}

inline void read_tensor(std::istream& in, Tensor& t, const std::string& dtype) {
    if (dtype == "f64") {
        for (double& v : t.data()) v = std::bit_cast<double>(read_le64(in));
    } else if (dtype == "f32") {
        for (double& v : t.data())
            v = static_cast<double>(std::bit_cast<float>(read_le32(in)));
    } else {
        throw DataError("unsupported checkpoint dtype: " + dtype);
    }
}

}  // namespace ckpt_detail

struct CheckpointExtra {
    TrainConfig train_config;
    TrainState train_state;
    AdamState adam;
    bool has_train_state = false;
};

inline void save_checkpoint(const std::string& dir, const Model& m,
                            const CheckpointExtra* extra = nullptr,
                            const std::string& dtype = "f64") {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    const std::size_t elem = dtype == "f32" ? 4 : 8;
    json index = json::array();
    std::size_t offset = 0;
    auto add_entry = [&](const std::string& name, const Tensor& t) {
        index.push_back(json{{"name", name}, {"shape", t.shape()}, {"offset", offset},
                             {"dtype", dtype}});
        offset += t.numel() * elem;
    };
    for (const auto& [name, t] : m.params.params()) add_entry(name, t);
    if (extra && extra->has_train_state) {
        for (const auto& [name, t] : extra->adam.m) add_entry("opt.m/" + name, t);
        for (const auto& [name, t] : extra->adam.v) add_entry("opt.v/" + name, t);
    }

    json manifest;
    manifest["format_version"] = 1;
    manifest["rng_algorithm"] = SeededRng::kAlgorithmId;
    manifest["dtype"] = dtype;
    manifest["config"] = json{{"dataset", m.data.to_json()},
                              {"model", m.cfg.to_json()},
                              {"normalization", m.norm.to_json()},
                              {"vocabulary", m.vocab.to_json()}};
    if (extra) {
        manifest["config"]["train"] = extra->train_config.to_json();
        if (extra->has_train_state) {
            manifest["train_state"] = json{{"stage_index", extra->train_state.stage_index},
                                           {"epoch_in_stage", extra->train_state.epoch_in_stage},
                                           {"finished", extra->train_state.finished},
                                           {"adam_step", extra->adam.step}};
        }
    }
    manifest["params"] = index;
    manifest["blob_bytes"] = offset;

    {
        std::ofstream mf(fs::path(dir) / "manifest.json");
        if (!mf) throw DataError("cannot write checkpoint manifest in " + dir);
        mf << manifest.dump(2) << "\n";
    }
    {
        std::ofstream blob(fs::path(dir) / "params.bin", std::ios::binary);
        if (!blob) throw DataError("cannot write checkpoint blob in " + dir);
        for (const auto& [name, t] : m.params.params()) ckpt_detail::write_tensor(blob, t, dtype);
        if (extra && extra->has_train_state) {
            for (const auto& [name, t] : extra->adam.m) ckpt_detail::write_tensor(blob, t, dtype);
            for (const auto& [name, t] : extra->adam.v) ckpt_detail::write_tensor(blob, t, dtype);
        }
    }
}

struct LoadedCheckpoint {
    Model model;
    CheckpointExtra extra;
};

inline LoadedCheckpoint load_checkpoint(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream mf(fs::path(dir) / "manifest.json");
    if (!mf) throw DataError("cannot open checkpoint manifest in " + dir);
    json manifest;
    try {
        mf >> manifest;
    } catch (const json::exception& e) {
        throw DataError("malformed checkpoint manifest in " + dir + ": " + e.what());
    }
    if (manifest.value("format_version", 0) != 1) {
        throw DataError("unsupported checkpoint format version in " + dir);
    }

    const auto& cfg = manifest.at("config");
    DatasetConfig data = DatasetConfig::from_json(cfg.at("dataset"));
    ModelConfig mc = ModelConfig::from_json(cfg.at("model"));
    NormalizationParams norm = NormalizationParams::from_json(cfg.at("normalization"));
    TacticVocabulary vocab = TacticVocabulary::from_json(cfg.at("vocabulary"));

    LoadedCheckpoint out{Model::create(data, mc, vocab, norm, 0), CheckpointExtra{}};
    if (cfg.contains("train")) out.extra.train_config = TrainConfig::from_json(cfg.at("train"));
    if (manifest.contains("train_state")) {
        out.extra.has_train_state = true;
        out.extra.train_state.stage_index = manifest["train_state"].at("stage_index");
        out.extra.train_state.epoch_in_stage = manifest["train_state"].at("epoch_in_stage");
        out.extra.train_state.finished = manifest["train_state"].at("finished");
        out.extra.adam.step = manifest["train_state"].at("adam_step");
    }

    std::ifstream blob(fs::path(dir) / "params.bin", std::ios::binary);
    if (!blob) throw DataError("cannot open checkpoint blob in " + dir);
    std::size_t expected_offset = 0;
    for (const auto& entry : manifest.at("params")) {
        const std::string name = entry.at("name").get<std::string>();
        const std::vector<std::size_t> shape = entry.at("shape").get<std::vector<std::size_t>>();
        const std::string dtype = entry.at("dtype").get<std::string>();
        const std::size_t offset = entry.at("offset").get<std::size_t>();
        if (offset != expected_offset) {
            throw DataError("checkpoint offsets do not tile the blob at " + name);
        }
        Tensor t(shape);
        ckpt_detail::read_tensor(blob, t, dtype);
        expected_offset += t.numel() * (dtype == "f32" ? 4 : 8);
        if (name.rfind("opt.m/", 0) == 0) {
            out.extra.adam.m[name.substr(6)] = std::move(t);
        } else if (name.rfind("opt.v/", 0) == 0) {
            out.extra.adam.v[name.substr(6)] = std::move(t);
        } else {
            if (!out.model.params.has(name)) {
                throw DataError("checkpoint parameter " + name + " unknown to this config");
            }
            Tensor& slot = out.model.params.param(name);
            if (!slot.same_shape(t)) {
                throw DataError("checkpoint parameter " + name + " has shape " +
                                Tensor::shape_string(t.shape()) + ", config expects " +
                                Tensor::shape_string(slot.shape()));
            }
            slot = std::move(t);
        }
    }
    if (manifest.contains("blob_bytes") &&
        manifest["blob_bytes"].get<std::size_t>() != expected_offset) {
        throw DataError("checkpoint blob size mismatch in " + dir);
    }
    return out;
}

}  // namespace tactictraj
