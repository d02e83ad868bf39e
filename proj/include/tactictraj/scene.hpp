#pragma once

#include <array>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tactictraj/errors.hpp"
#include "tactictraj/rng.hpp"
#include "tactictraj/tensor.hpp"

namespace tactictraj {

using nlohmann::json;

constexpr int kBallTeam = -1;

/// Scene layout: N agents = M teams x (N_T - 1) players + one shared ball.
struct DatasetConfig {
    std::size_t n_agents = 11;
    std::size_t m_teams = 2;
    std::size_t n_team_tokens = 6;  // players per team + ball
    std::size_t t_obs = 10;
    std::size_t t_pred = 20;
    int fps = 5;
    std::size_t vocab_size = 16;
    std::array<double, 2> court_extent = {28.6, 15.2};

    std::size_t total_frames() const { return t_obs + t_pred; }

    void validate() const {
        if (n_agents != m_teams * (n_team_tokens - 1) + 1) {
            throw ConfigError("agent count " + std::to_string(n_agents) +
                              " != m_teams*(n_team_tokens-1)+1 with M=" + std::to_string(m_teams) +
                              ", N_T=" + std::to_string(n_team_tokens));
        }
        if (t_obs == 0 || t_pred == 0 || fps <= 0 || vocab_size == 0) {
            throw ConfigError("degenerate dataset config");
        }
        if (court_extent[0] <= 0 || court_extent[1] <= 0) {
            throw ConfigError("court extent must be positive");
        }
    }

    json to_json() const {
        return json{{"n_agents", n_agents},     {"m_teams", m_teams},
                    {"n_team_tokens", n_team_tokens}, {"t_obs", t_obs},
                    {"t_pred", t_pred},         {"fps", fps},
                    {"vocab_size", vocab_size}, {"court_extent", court_extent}};
    }

    static DatasetConfig from_json(const json& j) {
        DatasetConfig c;
        c.n_agents = j.value("n_agents", c.n_agents);
        c.m_teams = j.value("m_teams", c.m_teams);
        c.n_team_tokens = j.value("n_team_tokens", c.n_team_tokens);
        c.t_obs = j.value("t_obs", c.t_obs);
        c.t_pred = j.value("t_pred", c.t_pred);
        c.fps = j.value("fps", c.fps);
        c.vocab_size = j.value("vocab_size", c.vocab_size);
        if (j.contains("court_extent")) {
            c.court_extent[0] = j["court_extent"][0].get<double>();
            c.court_extent[1] = j["court_extent"][1].get<double>();
        }
        c.validate();
        return c;
    }
};

struct TacticEntry {
    int id = 0;
    std::string name;
    std::string side;  // "offense" | "defense"
};

struct TacticVocabulary {
    std::vector<TacticEntry> entries;

    std::size_t size() const { return entries.size(); }

    const TacticEntry& entry(int id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= entries.size()) {
            throw VocabularyError("tactic id " + std::to_string(id) + " outside vocabulary of " +
                                  std::to_string(entries.size()));
        }
        return entries[static_cast<std::size_t>(id)];
    }

    void validate() const {
        std::map<std::string, int> seen;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (entries[i].id != static_cast<int>(i)) {
                throw VocabularyError("vocabulary ids must be 0..V-1 in order; entry " +
                                      std::to_string(i) + " has id " + std::to_string(entries[i].id));
            }
            if (entries[i].side != "offense" && entries[i].side != "defense") {
                throw VocabularyError("tactic side must be offense or defense: " + entries[i].name);
            }
            if (++seen[entries[i].name] > 1) {
                throw VocabularyError("duplicate tactic name: " + entries[i].name);
            }
        }
    }

    /// The 16-entry default vocabulary: 7 offensive + 9 defensive tactics.
    static TacticVocabulary default_vocabulary() {
        TacticVocabulary v;
        const char* offense[] = {"pick_and_roll",    "ball_movement", "fast_break", "single",
                                 "off_ball_screen", "offensive_rebound", "horns_set"};
        const char* defense[] = {"man_to_man",        "zone_2_3",      "zone_3_2",
                                 "zone_1_3_1",        "zone_2_1_2",    "zone_1_2_2",
                                 "defensive_rebound", "defensive_transition", "scramble_defense"};
        int id = 0;
        for (const char* name : offense) v.entries.push_back({id++, name, "offense"});
        for (const char* name : defense) v.entries.push_back({id++, name, "defense"});
        return v;
    }

    json to_json() const {
        json arr = json::array();
        for (const auto& e : entries) {
            arr.push_back(json{{"id", e.id}, {"name", e.name}, {"side", e.side}});
        }
        return json{{"entries", arr}};
    }

    static TacticVocabulary from_json(const json& j) {
        TacticVocabulary v;
        for (const auto& e : j.at("entries")) {
            v.entries.push_back({e.at("id").get<int>(), e.at("name").get<std::string>(),
                                 e.at("side").get<std::string>()});
        }
        v.validate();
        return v;
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw DataError("cannot write vocabulary file: " + path);
        out << to_json().dump(2) << "\n";
    }

    static TacticVocabulary load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open vocabulary file: " + path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw DataError("malformed vocabulary file " + path + ": " + e.what());
        }
        return from_json(j);
    }
};

struct TeamTactics {
    int team = 0;
    int observed = 0;
    int future = 0;
};

/// One fixed-length multi-agent play: positions in court meters plus
/// per-team tactic labels for the observed and future segments.
struct Scene {
    std::string scene_id;
    int fps = 5;
    std::size_t t_obs = 10;
    std::size_t t_pred = 20;
    Tensor positions;          // [N, t_obs + t_pred, 2]
    std::vector<int> team_of;  // per agent; kBallTeam for the ball
    std::size_t ball_index = 0;
    std::vector<TeamTactics> tactics;  // exactly one entry per team, ordered by team
    bool out_of_bounds = false;        // set by lenient-mode load

    std::size_t n_agents() const { return team_of.size(); }
    std::size_t total_frames() const { return t_obs + t_pred; }

    double x(std::size_t agent, std::size_t frame) const {
        return positions[positions.offset({agent, frame, 0})];
    }
    double y(std::size_t agent, std::size_t frame) const {
        return positions[positions.offset({agent, frame, 1})];
    }
    void set_xy(std::size_t agent, std::size_t frame, double px, double py) {
        positions[positions.offset({agent, frame, 0})] = px;
        positions[positions.offset({agent, frame, 1})] = py;
    }

    std::vector<std::size_t> team_members(int team) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < team_of.size(); ++i)
            if (team_of[i] == team) out.push_back(i);
        return out;
    }

    const TeamTactics& tactics_of(int team) const {
        for (const auto& t : tactics)
            if (t.team == team) return t;
        throw DataError("scene " + scene_id + " has no tactics for team " + std::to_string(team));
    }
};

enum class LoadMode { kStrict, kLenient };

namespace detail {

inline void validate_scene(Scene& s, const DatasetConfig& cfg, LoadMode mode) {
    if (s.n_agents() != cfg.n_agents) {
        throw DataError("scene " + s.scene_id + ": agent count " + std::to_string(s.n_agents()) +
                        " does not match config N=" + std::to_string(cfg.n_agents));
    }
    if (s.t_obs != cfg.t_obs || s.t_pred != cfg.t_pred) {
        throw DataError("scene " + s.scene_id + ": frame split " + std::to_string(s.t_obs) + "+" +
                        std::to_string(s.t_pred) + " does not match config");
    }
    std::size_t n_ball = 0;
    std::vector<std::size_t> per_team(cfg.m_teams, 0);
    for (std::size_t i = 0; i < s.team_of.size(); ++i) {
        if (s.team_of[i] == kBallTeam) {
            ++n_ball;
            s.ball_index = i;
        } else if (s.team_of[i] < 0 || static_cast<std::size_t>(s.team_of[i]) >= cfg.m_teams) {
            throw DataError("scene " + s.scene_id + ": agent " + std::to_string(i) +
                            " has invalid team " + std::to_string(s.team_of[i]));
        } else {
            ++per_team[static_cast<std::size_t>(s.team_of[i])];
        }
    }
    if (n_ball != 1) {
        throw DataError("scene " + s.scene_id + ": expected exactly one ball agent, found " +
                        std::to_string(n_ball));
    }
    for (std::size_t j = 0; j < cfg.m_teams; ++j) {
        if (per_team[j] != cfg.n_team_tokens - 1) {
            throw DataError("scene " + s.scene_id + ": team " + std::to_string(j) + " has " +
                            std::to_string(per_team[j]) + " players, expected " +
                            std::to_string(cfg.n_team_tokens - 1));
        }
    }
    if (s.tactics.size() != cfg.m_teams) {
        throw DataError("scene " + s.scene_id + ": expected " + std::to_string(cfg.m_teams) +
                        " tactic entries, found " + std::to_string(s.tactics.size()));
    }
    std::vector<bool> seen(cfg.m_teams, false);
    for (const auto& t : s.tactics) {
        if (t.team < 0 || static_cast<std::size_t>(t.team) >= cfg.m_teams || seen[t.team]) {
            throw DataError("scene " + s.scene_id + ": bad tactics team index " +
                            std::to_string(t.team));
        }
        seen[t.team] = true;
        for (int label : {t.observed, t.future}) {
            if (label < 0 || static_cast<std::size_t>(label) >= cfg.vocab_size) {
                throw VocabularyError("scene " + s.scene_id + ": tactic label " +
                                      std::to_string(label) + " outside vocabulary of " +
                                      std::to_string(cfg.vocab_size));
            }
        }
    }
    if (!s.positions.all_finite()) {
        throw DataError("scene " + s.scene_id + ": non-finite positions");
    }
    const double bx = 0.75 * cfg.court_extent[0];  // 1.5x court extent, centered
    const double by = 0.75 * cfg.court_extent[1];
    bool inside = true;
    for (std::size_t i = 0; i < s.n_agents() && inside; ++i) {
        for (std::size_t f = 0; f < s.total_frames() && inside; ++f) {
            inside = std::abs(s.x(i, f)) <= bx && std::abs(s.y(i, f)) <= by;
        }
    }
    if (!inside) {
        if (mode == LoadMode::kStrict) {
            throw DataError("scene " + s.scene_id + ": positions outside 1.5x court extent");
        }
        s.out_of_bounds = true;
    }
}

}  // namespace detail

inline json scene_to_json(const Scene& s) {
    json agents = json::array();
    for (std::size_t i = 0; i < s.n_agents(); ++i) {
        json xy = json::array();
        for (std::size_t f = 0; f < s.total_frames(); ++f) {
            xy.push_back(json::array({s.x(i, f), s.y(i, f)}));
        }
        agents.push_back(json{{"id", i},
                              {"team", s.team_of[i]},
                              {"role", s.team_of[i] == kBallTeam ? "ball" : "player"},
                              {"xy", xy}});
    }
    json tactics = json::array();
    for (const auto& t : s.tactics) {
        tactics.push_back(json{{"team", t.team}, {"observed", t.observed}, {"future", t.future}});
    }
    return json{{"scene_id", s.scene_id}, {"fps", s.fps},       {"t_obs", s.t_obs},
                {"t_pred", s.t_pred},     {"agents", agents},   {"tactics", tactics}};
}

inline Scene scene_from_json(const json& j) {
    Scene s;
    s.scene_id = j.at("scene_id").get<std::string>();
    s.fps = j.at("fps").get<int>();
    s.t_obs = j.at("t_obs").get<std::size_t>();
    s.t_pred = j.at("t_pred").get<std::size_t>();
    const auto& agents = j.at("agents");
    const std::size_t n = agents.size();
    const std::size_t frames = s.t_obs + s.t_pred;
    s.positions = Tensor({n, frames, 2});
    s.team_of.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = agents[i];
        s.team_of[i] = a.at("team").get<int>();
        const std::string role = a.at("role").get<std::string>();
        if ((role == "ball") != (s.team_of[i] == kBallTeam)) {
            throw DataError("scene " + s.scene_id + ": agent " + std::to_string(i) +
                            " role/team disagree");
        }
        const auto& xy = a.at("xy");
        if (xy.size() != frames) {
            throw DataError("scene " + s.scene_id + ": agent " + std::to_string(i) + " has " +
                            std::to_string(xy.size()) + " frames, expected " +
                            std::to_string(frames));
        }
        for (std::size_t f = 0; f < frames; ++f) {
            s.set_xy(i, f, xy[f][0].get<double>(), xy[f][1].get<double>());
        }
    }
    for (const auto& t : j.at("tactics")) {
        s.tactics.push_back({t.at("team").get<int>(), t.at("observed").get<int>(),
                             t.at("future").get<int>()});
    }
    return s;
}

inline std::string serialize_scene_line(const Scene& s) { return scene_to_json(s).dump(); }

/// Load a JSON Lines scene file, validating every scene against the config.
inline std::vector<Scene> load_scenes(const std::string& path, const DatasetConfig& cfg,
                                      LoadMode mode = LoadMode::kStrict) {
    cfg.validate();
    std::ifstream in(path);
    if (!in) throw DataError("cannot open scene file: " + path);
    std::vector<Scene> scenes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
        }
        Scene s;
        try {
            s = scene_from_json(j);
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": bad scene object: " +
                            e.what());
        }
        detail::validate_scene(s, cfg, mode);
        scenes.push_back(std::move(s));
    }
    return scenes;
}

inline void save_scenes(const std::string& path, const std::vector<Scene>& scenes) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write scene file: " + path);
    for (const auto& s : scenes) out << serialize_scene_line(s) << "\n";
}

/// Affine position normalization x -> (x - center) / scale.
struct NormalizationParams {
    std::array<double, 2> center = {0.0, 0.0};
    double scale = 14.3;

    void validate() const {
        if (scale <= 0.0) throw ArgumentError("normalization scale must be positive");
    }

    json to_json() const { return json{{"center", center}, {"scale", scale}}; }
    static NormalizationParams from_json(const json& j) {
        NormalizationParams p;
        p.center[0] = j.at("center")[0].get<double>();
        p.center[1] = j.at("center")[1].get<double>();
        p.scale = j.at("scale").get<double>();
        p.validate();
        return p;
    }
};

inline Scene normalize(const Scene& s, const NormalizationParams& p) {
    p.validate();
    Scene out = s;
    for (std::size_t i = 0; i < s.n_agents(); ++i) {
        for (std::size_t f = 0; f < s.total_frames(); ++f) {
            out.set_xy(i, f, (s.x(i, f) - p.center[0]) / p.scale,
                       (s.y(i, f) - p.center[1]) / p.scale);
        }
    }
    return out;
}

inline Scene denormalize(const Scene& s, const NormalizationParams& p) {
    p.validate();
    Scene out = s;
    for (std::size_t i = 0; i < s.n_agents(); ++i) {
        for (std::size_t f = 0; f < s.total_frames(); ++f) {
            out.set_xy(i, f, s.x(i, f) * p.scale + p.center[0],
                       s.y(i, f) * p.scale + p.center[1]);
        }
    }
    return out;
}

/// Deterministic shuffled split; train takes floor(ratio * n) scenes.
inline std::pair<std::vector<Scene>, std::vector<Scene>> split_dataset(
    const std::vector<Scene>& scenes, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw ArgumentError("split ratio must be in (0, 1), got " + std::to_string(ratio));
    }
    std::vector<std::size_t> order(scenes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    SeededRng rng(seed);
    rng.shuffle(order);
    const std::size_t n_train =
        static_cast<std::size_t>(std::floor(ratio * static_cast<double>(scenes.size())));
    std::pair<std::vector<Scene>, std::vector<Scene>> out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_train ? out.first : out.second).push_back(scenes[order[i]]);
    }
    return out;
}

}  // namespace tactictraj
