#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hilpareto/common/random.hpp"
#include "hilpareto/gp/likelihood.hpp"
#include "hilpareto/moo/user_port.hpp"
#include "hilpareto/pareto/front.hpp"
#include "hilpareto/task/params.hpp"
#include "hilpareto/task/trial.hpp"

namespace hilpareto::sim {

/// True latent challenge g(a) = clamp(intercept + slope * a, lo, hi), slope <= 0.
struct LatentChallenge {
    double intercept = 2.5;
    double slope = -5.0;
    double lo = -3.0;
    double hi = 3.0;

    double operator()(double assist) const;
    void validate() const;
};

/// A simulated participant. The controller is the LQR law scaled by skill,
/// acting on a state seen `reaction_delay` steps late, plus low-pass filtered
/// Gaussian motor noise whose std grows linearly over the trial (fatigue).
struct SimUserProfile {
    std::string id = "sim";
    double skill = 0.35;
    double control_noise = 0.0;         // N, motor-noise std at the start of a trial
    double noise_growth = 0.3;          // N/s, increase of the motor-noise std during a trial
    double noise_time_constant = 1.0;   // s, 0 gives white noise
    int reaction_delay = 10;            // integration steps
    LatentChallenge challenge;
    gp::LikelihoodParams response;      // how feedback is generated from g
    double success_threshold = 0.99;    // staircase success: best score at or above this
    double skill_drift = 0.0;           // skill change per attempt played, clamped to [0, 1]
    std::uint64_t seed = 1;

    void validate() const;
};

void to_json(nlohmann::json& j, const SimUserProfile& p);
void from_json(const nlohmann::json& j, SimUserProfile& p);

/// Reads a JSON array of profiles (or {"profiles": [...]}). Missing fields take defaults.
std::vector<SimUserProfile> load_profiles(const std::filesystem::path& path);

/// Per-attempt controller for the given skill. Noise draws come from a stream
/// derived from (profile seed, attempt seed).
task::PolicyFactory sim_policy_factory(const SimUserProfile& profile, double skill, const task::Vec4& gains,
                                       const task::PlantParams& p);

task::BestOfThree sim_play(const SimUserProfile& profile, double assist, std::span<const std::uint64_t, 3> seeds,
                           const task::PlantParams& p = {}, const task::DisturbanceConfig& dc = {});
task::BestOfThree sim_play(const SimUserProfile& profile, double assist, std::uint64_t trial_seed,
                           const task::PlantParams& p = {}, const task::DisturbanceConfig& dc = {});

gp::OrdinalLabel sim_ordinal(const SimUserProfile& profile, double assist, Rng& rng);
gp::Preference sim_pairwise(const SimUserProfile& profile, double assist_prev, double assist_curr, Rng& rng);

/// Mean best-of-three score at each grid level over n_seeds trial seeds. The
/// same seeds are used at every level.
std::vector<double> expected_scores(const SimUserProfile& profile, std::span<const double> grid, int n_seeds,
                                    std::uint64_t master_seed, const task::PlantParams& p = {},
                                    const task::DisturbanceConfig& dc = {});

/// Ground-truth front: Monte Carlo expected score against the exact g.
pareto::ParetoFront true_front(const SimUserProfile& profile, std::span<const double> grid, int n_seeds,
                               std::uint64_t master_seed, const task::PlantParams& p = {},
                               const task::DisturbanceConfig& dc = {});

/// UserPort backed by a profile. Tracks attempts played for skill drift.
class SimulatedUser : public moo::UserPort {
public:
    explicit SimulatedUser(SimUserProfile profile, task::PlantParams p = {}, task::DisturbanceConfig dc = {});

    task::BestOfThree play(double assist, std::span<const std::uint64_t, 3> attempt_seeds) override;
    gp::OrdinalLabel rate(double assist, std::uint64_t query_seed) override;
    gp::Preference compare(double prev_assist, double curr_assist, std::uint64_t query_seed) override;
    bool simulated() const override { return true; }

    const SimUserProfile& profile() const { return profile_; }
    double current_skill() const;
    long attempts_played() const { return attempts_; }

private:
    SimUserProfile profile_;
    task::PlantParams plant_;
    task::DisturbanceConfig dist_;
    task::Vec4 gains_;
    long attempts_ = 0;
};

}  // namespace hilpareto::sim
