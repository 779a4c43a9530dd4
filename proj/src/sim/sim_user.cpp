#include "hilpareto/sim/sim_user.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <stdexcept>

#include "hilpareto/common/errors.hpp"
#include "hilpareto/task/lqr.hpp"

namespace hilpareto::sim {

namespace {

constexpr std::uint64_t kPolicyStream = 0x51;

/// Per-attempt controller state: a ring of recent states and the motor-noise filter.
class DelayedNoisyController {
public:
    DelayedNoisyController(double skill, double noise, double growth, double tau, int delay, task::Vec4 gains,
                           double dt, std::uint64_t seed)
        : skill_(skill), noise_(noise), growth_(growth), gains_(std::move(gains)), history_(static_cast<std::size_t>(delay) + 1),
          rng_(seed) {
        decay_ = tau > 0.0 ? std::exp(-dt / tau) : 0.0;
        innovation_ = std::sqrt(1.0 - decay_ * decay_);
        filtered_ = standard_normal(rng_);
    }

    double operator()(const task::TaskState& s) {
        const std::size_t cap = history_.size();
        history_[count_ % cap] = s.vec();
        // Until the ring fills, the oldest available state is the initial one.
        const std::size_t seen = count_ >= cap - 1 ? count_ - (cap - 1) : 0;
        const task::Vec4& delayed = history_[seen % cap];
        ++count_;
        const double u = -skill_ * gains_.dot(delayed);
        if (count_ > 1) filtered_ = decay_ * filtered_ + innovation_ * standard_normal(rng_);
        return u + (noise_ + growth_ * s.t) * filtered_;
    }

private:
    double skill_;
    double noise_;
    double growth_;
    task::Vec4 gains_;
    std::vector<task::Vec4> history_;
    std::size_t count_ = 0;
    Rng rng_;
    double decay_ = 0.0;
    double innovation_ = 1.0;
    double filtered_ = 0.0;
};

}  // namespace

double LatentChallenge::operator()(double assist) const {
    return std::clamp(intercept + slope * assist, lo, hi);
}

void LatentChallenge::validate() const {
    if (!std::isfinite(intercept) || !std::isfinite(slope) || !std::isfinite(lo) || !std::isfinite(hi))
        throw ConfigError("latent challenge: parameters must be finite");
    if (slope > 0.0) throw ConfigError("latent challenge: slope must be <= 0 (challenge falls with assistance)");
    if (!(lo <= hi)) throw ConfigError("latent challenge: need lo <= hi");
}

void SimUserProfile::validate() const {
    if (!(skill >= 0.0 && skill <= 1.0)) throw ConfigError("sim profile: skill must lie in [0, 1]");
    if (!(control_noise >= 0.0) || !std::isfinite(control_noise))
        throw ConfigError("sim profile: control_noise must be >= 0");
    if (!(noise_growth >= 0.0) || !std::isfinite(noise_growth))
        throw ConfigError("sim profile: noise_growth must be >= 0");
    if (!(noise_time_constant >= 0.0) || !std::isfinite(noise_time_constant))
        throw ConfigError("sim profile: noise_time_constant must be >= 0");
    if (reaction_delay < 0) throw ConfigError("sim profile: reaction_delay must be >= 0");
    if (!(success_threshold > 0.0 && success_threshold <= 1.0))
        throw ConfigError("sim profile: success_threshold must lie in (0, 1]");
    if (!std::isfinite(skill_drift)) throw ConfigError("sim profile: skill_drift must be finite");
    challenge.validate();
    response.validate();
}

void to_json(nlohmann::json& j, const SimUserProfile& p) {
    j = nlohmann::json{
        {"id", p.id},
        {"skill", p.skill},
        {"control_noise", p.control_noise},
        {"noise_growth", p.noise_growth},
        {"noise_time_constant", p.noise_time_constant},
        {"reaction_delay", p.reaction_delay},
        {"challenge",
         {{"intercept", p.challenge.intercept},
          {"slope", p.challenge.slope},
          {"lo", p.challenge.lo},
          {"hi", p.challenge.hi}}},
        {"response", {{"c_o", p.response.c_o}, {"c_p", p.response.c_p}, {"t1", p.response.t1}, {"t2", p.response.t2}}},
        {"success_threshold", p.success_threshold},
        {"skill_drift", p.skill_drift},
        {"seed", p.seed},
    };
}

void from_json(const nlohmann::json& j, SimUserProfile& p) {
    SimUserProfile d;
    p.id = j.value("id", d.id);
    p.skill = j.value("skill", d.skill);
    p.control_noise = j.value("control_noise", d.control_noise);
    p.noise_growth = j.value("noise_growth", d.noise_growth);
    p.noise_time_constant = j.value("noise_time_constant", d.noise_time_constant);
    p.reaction_delay = j.value("reaction_delay", d.reaction_delay);
    const nlohmann::json c = j.value("challenge", nlohmann::json::object());
    p.challenge.intercept = c.value("intercept", d.challenge.intercept);
    p.challenge.slope = c.value("slope", d.challenge.slope);
    p.challenge.lo = c.value("lo", d.challenge.lo);
    p.challenge.hi = c.value("hi", d.challenge.hi);
    const nlohmann::json r = j.value("response", nlohmann::json::object());
    p.response.c_o = r.value("c_o", d.response.c_o);
    p.response.c_p = r.value("c_p", d.response.c_p);
    p.response.t1 = r.value("t1", d.response.t1);
    p.response.t2 = r.value("t2", d.response.t2);
    p.success_threshold = j.value("success_threshold", d.success_threshold);
    p.skill_drift = j.value("skill_drift", d.skill_drift);
    p.seed = j.value("seed", d.seed);
    p.validate();
}

std::vector<SimUserProfile> load_profiles(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open profile file: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("profile file " + path.string() + ": " + e.what());
    }
    const nlohmann::json& arr = j.is_object() && j.contains("profiles") ? j.at("profiles") : j;
    if (!arr.is_array()) throw ConfigError("profile file must hold an array of profiles");
    std::vector<SimUserProfile> out;
    try {
        for (const auto& item : arr) out.push_back(item.get<SimUserProfile>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("profile file " + path.string() + ": " + e.what());
    }
    return out;
}

task::PolicyFactory sim_policy_factory(const SimUserProfile& profile, double skill, const task::Vec4& gains,
                                       const task::PlantParams& p) {
    const double s = std::clamp(skill, 0.0, 1.0);
    return [=](std::uint64_t attempt_seed) -> task::Policy {
        auto ctl = std::make_shared<DelayedNoisyController>(s, profile.control_noise, profile.noise_growth,
                                                            profile.noise_time_constant,
                                                            profile.reaction_delay, gains, p.dt,
                                                            derive_seed(profile.seed, {kPolicyStream, attempt_seed}));
        return [ctl](const task::TaskState& st) { return (*ctl)(st); };
    };
}

task::BestOfThree sim_play(const SimUserProfile& profile, double assist, std::span<const std::uint64_t, 3> seeds,
                           const task::PlantParams& p, const task::DisturbanceConfig& dc) {
    profile.validate();
    return task::best_of_three(sim_policy_factory(profile, profile.skill, task::lqr_gains(p), p), assist, seeds, p,
                               dc);
}

task::BestOfThree sim_play(const SimUserProfile& profile, double assist, std::uint64_t trial_seed,
                           const task::PlantParams& p, const task::DisturbanceConfig& dc) {
    const auto seeds = task::attempt_seeds(trial_seed);
    return sim_play(profile, assist, std::span<const std::uint64_t, 3>(seeds), p, dc);
}

gp::OrdinalLabel sim_ordinal(const SimUserProfile& profile, double assist, Rng& rng) {
    const double g = profile.challenge(assist);
    const double u = uniform01(rng);
    const double p_easy = gp::ordinal_prob(g, gp::OrdinalLabel::easy, profile.response);
    if (u < p_easy) return gp::OrdinalLabel::easy;
    const double p_mod = gp::ordinal_prob(g, gp::OrdinalLabel::moderate, profile.response);
    if (u < p_easy + p_mod) return gp::OrdinalLabel::moderate;
    return gp::OrdinalLabel::hard;
}

gp::Preference sim_pairwise(const SimUserProfile& profile, double assist_prev, double assist_curr, Rng& rng) {
    const double p = gp::pairwise_prob(profile.challenge(assist_curr), profile.challenge(assist_prev), profile.response);
    return uniform01(rng) < p ? gp::Preference::current_harder : gp::Preference::previous_harder;
}

std::vector<double> expected_scores(const SimUserProfile& profile, std::span<const double> grid, int n_seeds,
                                    std::uint64_t master_seed, const task::PlantParams& p,
                                    const task::DisturbanceConfig& dc) {
    if (n_seeds < 1) throw std::invalid_argument("expected_scores: n_seeds must be >= 1");
    profile.validate();
    const task::PolicyFactory factory = sim_policy_factory(profile, profile.skill, task::lqr_gains(p), p);
    std::vector<std::array<std::uint64_t, 3>> seeds;
    for (int k = 0; k < n_seeds; ++k) seeds.push_back(task::attempt_seeds(derive_seed(master_seed, {std::uint64_t(k)})));
    std::vector<double> out;
    out.reserve(grid.size());
    for (double a : grid) {
        double acc = 0.0;
        for (const auto& s : seeds)
            acc += task::best_of_three(factory, a, std::span<const std::uint64_t, 3>(s), p, dc).best().score;
        out.push_back(acc / n_seeds);
    }
    return out;
}

pareto::ParetoFront true_front(const SimUserProfile& profile, std::span<const double> grid, int n_seeds,
                               std::uint64_t master_seed, const task::PlantParams& p,
                               const task::DisturbanceConfig& dc) {
    const std::vector<double> score = expected_scores(profile, grid, n_seeds, master_seed, p, dc);
    std::vector<pareto::ObjectivePoint> pts;
    pts.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) pts.push_back({grid[i], score[i], profile.challenge(grid[i])});
    return pareto::make_front(std::move(pts), profile.response.t1, profile.response.t2);
}

SimulatedUser::SimulatedUser(SimUserProfile profile, task::PlantParams p, task::DisturbanceConfig dc)
    : profile_(std::move(profile)), plant_(p), dist_(dc) {
    profile_.validate();
    gains_ = task::lqr_gains(plant_);
}

double SimulatedUser::current_skill() const {
    return std::clamp(profile_.skill + profile_.skill_drift * static_cast<double>(attempts_), 0.0, 1.0);
}

task::BestOfThree SimulatedUser::play(double assist, std::span<const std::uint64_t, 3> seeds) {
    // Skill is frozen for the three attempts of one trial, then drifts.
    const task::PolicyFactory factory = sim_policy_factory(profile_, current_skill(), gains_, plant_);
    task::BestOfThree out = task::best_of_three(factory, assist, seeds, plant_, dist_);
    attempts_ += 3;
    return out;
}

gp::OrdinalLabel SimulatedUser::rate(double assist, std::uint64_t query_seed) {
    Rng rng(derive_seed(profile_.seed, {query_seed}));
    return sim_ordinal(profile_, assist, rng);
}

gp::Preference SimulatedUser::compare(double prev_assist, double curr_assist, std::uint64_t query_seed) {
    Rng rng(derive_seed(profile_.seed, {query_seed}));
    return sim_pairwise(profile_, prev_assist, curr_assist, rng);
}

}  // namespace hilpareto::sim
