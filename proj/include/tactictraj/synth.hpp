#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "tactictraj/scene.hpp"

namespace tactictraj {

/// Scripted-play generator configuration. tactic_mix is a distribution over
/// vocabulary ids; each side (offense / defense) is renormalized separately.
struct GeneratorConfig {
    double sigma_pos = 0.3;   // additive position noise, meters
    double p_switch = 0.3;    // probability the future segment switches tactic
    std::map<int, double> tactic_mix;  // empty -> uniform over the scripted ids

    json to_json() const {
        json mix = json::object();
        for (const auto& [id, w] : tactic_mix) mix[std::to_string(id)] = w;
        return json{{"sigma_pos", sigma_pos}, {"p_switch", p_switch}, {"tactic_mix", mix}};
    }

    static GeneratorConfig from_json(const json& j) {
        GeneratorConfig c;
        c.sigma_pos = j.value("sigma_pos", c.sigma_pos);
        c.p_switch = j.value("p_switch", c.p_switch);
        if (j.contains("tactic_mix")) {
            for (const auto& [key, val] : j.at("tactic_mix").items()) {
                c.tactic_mix[std::stoi(key)] = val.get<double>();
            }
        }
        return c;
    }
};

namespace synth_detail {

struct Vec2 {
    double x = 0.0, y = 0.0;
    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::hypot(x, y); }
    Vec2 unit() const {
        const double n = norm();
        return n > 1e-12 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
};

// Scripted tactic ids in the default vocabulary.
constexpr int kPickAndRoll = 0;
constexpr int kBallMovement = 1;
constexpr int kFastBreak = 2;
constexpr int kSingle = 3;
constexpr int kManToMan = 7;
constexpr int kZone23 = 8;
constexpr int kDefensiveTransition = 14;
constexpr int kScramble = 15;

inline const std::vector<int>& scripted_offense() {
    static const std::vector<int> ids = {kPickAndRoll, kBallMovement, kFastBreak, kSingle};
    return ids;
}
inline const std::vector<int>& scripted_defense() {
    static const std::vector<int> ids = {kManToMan, kZone23, kDefensiveTransition, kScramble};
    return ids;
}

constexpr double kDt = 0.2;  // 5 Hz
constexpr std::size_t kPlayers = 5;

inline Vec2 perimeter_slot(Vec2 basket, double angle_deg, double radius) {
    const double a = angle_deg * M_PI / 180.0;
    return basket + Vec2{std::cos(a), std::sin(a)} * radius;
}

/// Per-scene play simulation. One offense team runs an offense script that
/// also moves the ball; the other team runs a defense script reacting to the
/// offense and the ball. Future-segment scripts continue from the live state.
class PlaySim {
public:
    PlaySim(const DatasetConfig& cfg, const GeneratorConfig& gen, SeededRng rng)
        : cfg_(cfg), gen_(gen), rng_(rng) {
        basket_ = {0.44 * cfg.court_extent[0], 0.0};
        half_x_ = 0.5 * cfg.court_extent[0];
        half_y_ = 0.5 * cfg.court_extent[1];
    }

    /// offense[i], defense[i]: player positions; ball: shared.
    std::vector<Vec2> offense = std::vector<Vec2>(kPlayers);
    std::vector<Vec2> defense = std::vector<Vec2>(kPlayers);
    Vec2 ball;

    void init(int offense_tactic, int defense_tactic) {
        off_tactic_ = offense_tactic;
        def_tactic_ = defense_tactic;
        place_offense_initial();
        place_defense_initial();
        clamp_all();
        segment_frame_ = 0;
    }

    void switch_tactics(int offense_tactic, int defense_tactic) {
        if (offense_tactic != off_tactic_) {
            off_tactic_ = offense_tactic;
            reset_offense_roles();
        }
        def_tactic_ = defense_tactic;
        segment_frame_ = 0;
    }

    void step() {
        step_offense();
        step_defense();
        clamp_all();
        ++segment_frame_;
    }

private:
    // ---- placement ---------------------------------------------------------

    void place_offense_initial() {
        switch (off_tactic_) {
            case kFastBreak: {
                for (std::size_t i = 0; i < kPlayers; ++i) {
                    const double lane = lane_y(i);
                    offense[i] = {rng_.uniform_range(-0.8 * half_x_, -0.4 * half_x_),
                                  lane + rng_.uniform_range(-0.8, 0.8)};
                }
                holder_ = 2;
                break;
            }
            case kSingle: {
                driver_ = rng_.uniform_index(kPlayers);
                const double angles[] = {125, 150, 180, 210, 235};
                for (std::size_t i = 0; i < kPlayers; ++i) {
                    const double r = (i == driver_) ? 7.6 : 8.2;
                    offense[i] = perimeter_slot(basket_, angles[i], r) + jitter(0.6);
                }
                holder_ = driver_;
                break;
            }
            case kPickAndRoll: {
                handler_ = 0;
                screener_ = 1;
                offense[handler_] = perimeter_slot(basket_, 180, 7.2) + jitter(0.4);
                offense[screener_] = basket_ + Vec2{-3.2, 2.2} + jitter(0.4);
                offense[2] = perimeter_slot(basket_, 128, 7.9) + jitter(0.4);
                offense[3] = perimeter_slot(basket_, 232, 7.9) + jitter(0.4);
                offense[4] = perimeter_slot(basket_, 155, 8.3) + jitter(0.4);
                holder_ = handler_;
                break;
            }
            case kBallMovement:
            default: {
                for (std::size_t i = 0; i < kPlayers; ++i) {
                    slot_angle_[i] = 140.0 + 20.0 * static_cast<double>(i);
                    offense[i] =
                        perimeter_slot(basket_, slot_angle_[i], 6.9) + jitter(0.5);
                }
                holder_ = rng_.uniform_index(kPlayers);
                pass_countdown_ = 3 + static_cast<int>(rng_.uniform_index(3));
                break;
            }
        }
        ball = offense[holder_] + Vec2{0.3, 0.0};
        pass_frames_left_ = 0;
    }

    void place_defense_initial() {
        switch (def_tactic_) {
            case kDefensiveTransition:
                for (std::size_t i = 0; i < kPlayers; ++i) {
                    defense[i] = {rng_.uniform_range(-0.75 * half_x_, -0.3 * half_x_),
                                  rng_.uniform_range(-0.7 * half_y_, 0.7 * half_y_)};
                }
                break;
            case kZone23:
                for (std::size_t i = 0; i < kPlayers; ++i) defense[i] = zone_anchor(i) + jitter(0.5);
                break;
            case kScramble:
                for (std::size_t i = 0; i < kPlayers; ++i) {
                    defense[i] = ball + jitter(2.5) + Vec2{-1.0, 0.0};
                }
                break;
            case kManToMan:
            default:
                for (std::size_t i = 0; i < kPlayers; ++i) {
                    defense[i] = offense[i] + (basket_ - offense[i]).unit() * 1.2 + jitter(0.3);
                }
                break;
        }
    }

    void reset_offense_roles() {
        // A new offense script adopts the live formation: role indices are
        // re-drawn but positions are never teleported.
        switch (off_tactic_) {
            case kSingle:
                driver_ = holder_;
                break;
            case kPickAndRoll:
                handler_ = holder_;
                screener_ = nearest_offender_to(offense[handler_], handler_);
                break;
            case kBallMovement:
                for (std::size_t i = 0; i < kPlayers; ++i) {
                    const Vec2 rel = offense[i] - basket_;
                    slot_angle_[i] = std::atan2(rel.y, rel.x) * 180.0 / M_PI;
                    if (slot_angle_[i] < 0) slot_angle_[i] += 360.0;
                    slot_angle_[i] = std::clamp(slot_angle_[i], 120.0, 240.0);
                }
                pass_countdown_ = 2;
                break;
            default:
                break;
        }
        pass_frames_left_ = 0;
    }

    // ---- offense scripts ----------------------------------------------------

    void step_offense() {
        switch (off_tactic_) {
            case kBallMovement: {
                for (std::size_t i = 0; i < kPlayers; ++i) {
                    // Slot holders drift on the arc; occasional cuts re-slot.
                    if (rng_.bernoulli(0.05)) {
                        slot_angle_[i] =
                            std::clamp(slot_angle_[i] + rng_.uniform_range(-18.0, 18.0), 118.0, 242.0);
                    }
                    seek(offense[i], perimeter_slot(basket_, slot_angle_[i], 6.9), 3.0);
                }
                step_ball_passing();
                break;
            }
            case kSingle: {
                for (std::size_t i = 0; i < kPlayers; ++i) {
                    if (i == driver_) {
                        seek(offense[i], basket_ + Vec2{-1.1, 0.4}, 4.6);
                    } else {
                        seek(offense[i], offense[i], 1.0);  // hold with jitter
                    }
                }
                ball = offense[driver_] + (basket_ - offense[driver_]).unit() * 0.4 + jitter(0.12);
                holder_ = driver_;
                break;
            }
            case kFastBreak: {
                for (std::size_t i = 0; i < kPlayers; ++i) {
                    const Vec2 target{0.38 * cfg_.court_extent[0] - (i == holder_ ? 1.5 : 0.0),
                                      lane_y(i) * 0.55};
                    seek(offense[i], target, 6.5);
                }
                ball = offense[holder_] + Vec2{0.45, 0.0} + jitter(0.12);
                break;
            }
            case kPickAndRoll: {
                if (segment_frame_ < 5) {
                    // Screener arrives at the handler's hip; handler waits.
                    seek(offense[screener_], offense[handler_] + Vec2{0.7, 0.9}, 5.0);
                    seek(offense[handler_], offense[handler_], 1.0);
                } else {
                    seek(offense[screener_], basket_ + Vec2{-1.2, -1.0}, 5.0);  // roll
                    seek(offense[handler_], basket_ + Vec2{-1.8, 1.4}, 4.2);    // drive off screen
                }
                for (std::size_t i = 0; i < kPlayers; ++i) {
                    if (i != handler_ && i != screener_) seek(offense[i], offense[i], 1.0);
                }
                ball = offense[handler_] + Vec2{0.25, 0.25} + jitter(0.12);
                holder_ = handler_;
                break;
            }
            default: {  // unscripted offense ids: hold a loose formation
                for (std::size_t i = 0; i < kPlayers; ++i) seek(offense[i], offense[i], 1.2);
                ball = offense[holder_] + Vec2{0.3, 0.0} + jitter(0.12);
                break;
            }
        }
    }

    void step_ball_passing() {
        if (pass_frames_left_ > 0) {
            // Ball in flight along a straight pass.
            ball = ball + pass_velocity_ * kDt + jitter(0.08);
            if (--pass_frames_left_ == 0) {
                holder_ = pass_target_;
                ball = offense[holder_] + Vec2{0.3, 0.0};
            }
            return;
        }
        if (--pass_countdown_ <= 0) {
            pass_target_ = (holder_ + 1 + rng_.uniform_index(kPlayers - 1)) % kPlayers;
            const Vec2 to = offense[pass_target_] - ball;
            const int flight = std::max(1, static_cast<int>(to.norm() / (11.0 * kDt)));
            pass_frames_left_ = flight;
            pass_velocity_ = to * (1.0 / (flight * kDt));
            pass_countdown_ = 3 + static_cast<int>(rng_.uniform_index(3));
        } else {
            ball = offense[holder_] + Vec2{0.3, 0.0} + jitter(0.1);
        }
    }

    // ---- defense scripts ----------------------------------------------------

    void step_defense() {
        switch (def_tactic_) {
            case kManToMan:
                for (std::size_t i = 0; i < kPlayers; ++i) {
                    const Vec2 target = offense[i] + (basket_ - offense[i]).unit() * 1.2;
                    seek(defense[i], target, 6.5);
                }
                break;
            case kZone23:
                for (std::size_t i = 0; i < kPlayers; ++i) {
                    const Vec2 anchor = zone_anchor(i);
                    const Vec2 shade = (ball - anchor) * 0.18;
                    seek(defense[i], anchor + shade, 4.0);
                }
                break;
            case kDefensiveTransition:
                for (std::size_t i = 0; i < kPlayers; ++i) {
                    seek(defense[i], basket_ + Vec2{-2.6 - 0.5 * static_cast<double>(i % 3),
                                                    retreat_y(i)},
                         7.0);
                }
                break;
            case kScramble: {
                // Two nearest defenders swarm the ball; the rest match up.
                std::vector<std::size_t> order(kPlayers);
                for (std::size_t i = 0; i < kPlayers; ++i) order[i] = i;
                std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    return (defense[a] - ball).norm() < (defense[b] - ball).norm();
                });
                for (std::size_t rank = 0; rank < kPlayers; ++rank) {
                    const std::size_t i = order[rank];
                    if (rank < 2) {
                        seek(defense[i], ball, 7.0, 1.6);
                    } else {
                        const Vec2 target =
                            offense[i] + (basket_ - offense[i]).unit() * 0.9;
                        seek(defense[i], target, 6.0, 1.6);
                    }
                }
                break;
            }
            default:  // unscripted defense ids: sagging spread formation
                for (std::size_t i = 0; i < kPlayers; ++i) {
                    seek(defense[i], zone_anchor(i) + Vec2{-1.0, 0.0}, 3.0);
                }
                break;
        }
    }

    // ---- shared helpers -----------------------------------------------------

    void seek(Vec2& pos, Vec2 target, double max_speed, double noise_mult = 1.0) {
        const Vec2 delta = target - pos;
        const double max_step = max_speed * kDt;
        const double dist = delta.norm();
        Vec2 step = dist > max_step ? delta.unit() * max_step : delta;
        pos = pos + step + jitter(gen_.sigma_pos * noise_mult);
    }

    Vec2 jitter(double sigma) { return {rng_.gaussian() * sigma, rng_.gaussian() * sigma}; }

    static double lane_y(std::size_t i) {
        static const double lanes[] = {-6.0, -3.0, 0.0, 3.0, 6.0};
        return lanes[i];
    }

    Vec2 zone_anchor(std::size_t i) const {
        static const Vec2 rel[] = {{-4.6, 2.4}, {-4.6, -2.4}, {-1.7, 3.4}, {-1.7, -3.4}, {-1.3, 0.0}};
        return basket_ + rel[i];
    }

    static double retreat_y(std::size_t i) {
        static const double ys[] = {2.6, -2.6, 1.2, -1.2, 0.0};
        return ys[i];
    }

    std::size_t nearest_offender_to(Vec2 p, std::size_t excluding) const {
        std::size_t best = (excluding + 1) % kPlayers;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < kPlayers; ++i) {
            if (i == excluding) continue;
            const double d = (offense[i] - p).norm();
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    }

    void clamp_all() {
        const double bx = 1.4 * half_x_, by = 1.4 * half_y_;
        auto clamp_one = [&](Vec2& p) {
            p.x = std::clamp(p.x, -bx, bx);
            p.y = std::clamp(p.y, -by, by);
        };
        for (auto& p : offense) clamp_one(p);
        for (auto& p : defense) clamp_one(p);
        clamp_one(ball);
    }

    DatasetConfig cfg_;
    GeneratorConfig gen_;
    SeededRng rng_;
    Vec2 basket_;
    double half_x_ = 14.3, half_y_ = 7.6;

    int off_tactic_ = kBallMovement;
    int def_tactic_ = kManToMan;
    int segment_frame_ = 0;

    std::size_t holder_ = 0, driver_ = 0, handler_ = 0, screener_ = 1;
    std::size_t pass_target_ = 0;
    int pass_countdown_ = 4, pass_frames_left_ = 0;
    Vec2 pass_velocity_;
    double slot_angle_[kPlayers] = {140, 160, 180, 200, 220};
};

inline int draw_from_mix(const std::vector<std::pair<int, double>>& side_mix, SeededRng& rng) {
    double total = 0.0;
    for (const auto& [id, w] : side_mix) total += w;
    double u = rng.uniform() * total;
    for (const auto& [id, w] : side_mix) {
        u -= w;
        if (u <= 0.0) return id;
    }
    return side_mix.back().first;
}

}  // namespace synth_detail

/// Generate scripted plays. Team roles (which team attacks) are drawn per
/// scene; labels record the scripts actually driving each segment's motion.
inline std::vector<Scene> synth_generate(SeededRng& rng, const DatasetConfig& cfg,
                                         std::size_t n_scenes, const GeneratorConfig& gen,
                                         const TacticVocabulary& vocab =
                                             TacticVocabulary::default_vocabulary()) {
    using namespace synth_detail;
    cfg.validate();
    if (cfg.m_teams != 2 || cfg.n_team_tokens != 6) {
        throw ArgumentError("generator supports M=2 teams of 5 players plus ball");
    }

    std::map<int, double> mix = gen.tactic_mix;
    if (mix.empty()) {
        for (int id : scripted_offense()) mix[id] = 1.0;
        for (int id : scripted_defense()) mix[id] = 1.0;
    }
    std::vector<std::pair<int, double>> off_mix, def_mix;
    std::size_t nonzero = 0;
    for (const auto& [id, w] : mix) {
        if (w < 0.0) throw ArgumentError("negative tactic mix weight for id " + std::to_string(id));
        if (w == 0.0) continue;
        ++nonzero;
        if (id < 0 || static_cast<std::size_t>(id) >= vocab.size()) {
            throw VocabularyError("tactic mix id " + std::to_string(id) + " outside vocabulary");
        }
        (vocab.entry(id).side == "offense" ? off_mix : def_mix).emplace_back(id, w);
    }
    if (nonzero < 2 || off_mix.empty() || def_mix.empty()) {
        throw ArgumentError("tactic mix needs nonzero weight on both an offense and a defense tactic");
    }

    auto switched = [&](int current, const std::vector<std::pair<int, double>>& side,
                        SeededRng& r) {
        std::vector<std::pair<int, double>> rest;
        for (const auto& e : side)
            if (e.first != current) rest.push_back(e);
        if (rest.empty() || !r.bernoulli(gen.p_switch)) return current;
        return draw_from_mix(rest, r);
    };

    std::vector<Scene> scenes;
    scenes.reserve(n_scenes);
    for (std::size_t s = 0; s < n_scenes; ++s) {
        SeededRng scene_rng = rng.substream(0x5CE4E000ULL + s);
        const int offense_team = scene_rng.bernoulli(0.5) ? 1 : 0;

        const int off_obs = draw_from_mix(off_mix, scene_rng);
        const int def_obs = draw_from_mix(def_mix, scene_rng);
        const int off_fut = switched(off_obs, off_mix, scene_rng);
        const int def_fut = switched(def_obs, def_mix, scene_rng);

        PlaySim sim(cfg, gen, scene_rng.substream(1));
        sim.init(off_obs, def_obs);

        Scene scene;
        scene.scene_id = "synth-" + std::to_string(s);
        scene.fps = cfg.fps;
        scene.t_obs = cfg.t_obs;
        scene.t_pred = cfg.t_pred;
        scene.positions = Tensor({cfg.n_agents, cfg.total_frames(), 2});
        scene.team_of.resize(cfg.n_agents);
        // Layout: agents 0..4 team 0, agents 5..9 team 1, agent 10 ball.
        for (std::size_t i = 0; i < 5; ++i) scene.team_of[i] = 0;
        for (std::size_t i = 5; i < 10; ++i) scene.team_of[i] = 1;
        scene.team_of[10] = kBallTeam;
        scene.ball_index = 10;

        for (std::size_t f = 0; f < cfg.total_frames(); ++f) {
            if (f == cfg.t_obs) sim.switch_tactics(off_fut, def_fut);
            if (f > 0) sim.step();
            for (std::size_t i = 0; i < 5; ++i) {
                const auto& off = sim.offense[i];
                const auto& def = sim.defense[i];
                const std::size_t off_agent = offense_team == 0 ? i : i + 5;
                const std::size_t def_agent = offense_team == 0 ? i + 5 : i;
                scene.set_xy(off_agent, f, off.x, off.y);
                scene.set_xy(def_agent, f, def.x, def.y);
            }
            scene.set_xy(10, f, sim.ball.x, sim.ball.y);
        }

        TeamTactics off_t{offense_team, off_obs, off_fut};
        TeamTactics def_t{1 - offense_team, def_obs, def_fut};
        scene.tactics = offense_team == 0 ? std::vector<TeamTactics>{off_t, def_t}
                                          : std::vector<TeamTactics>{def_t, off_t};
        scenes.push_back(std::move(scene));
    }
    return scenes;
}

}  // namespace tactictraj
