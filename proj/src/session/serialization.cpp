#include "hilpareto/session/serialization.hpp"

#include <string>

#include "hilpareto/common/errors.hpp"

using nlohmann::json;

namespace hilpareto {

namespace {

gp::OrdinalLabel label_field(const json& j) {
    const auto l = gp::parse_label(j.get<std::string>());
    if (!l) throw LogFormatError("unknown ordinal label: " + j.get<std::string>());
    return *l;
}

gp::Preference preference_field(const json& j) {
    const auto p = gp::parse_preference(j.get<std::string>());
    if (!p) throw LogFormatError("unknown pairwise choice: " + j.get<std::string>());
    return *p;
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

namespace task {

void to_json(json& j, const PlantParams& p) {
    j = json{{"cart_mass", p.cart_mass},
             {"pole_mass", p.pole_mass},
             {"half_length", p.half_length},
             {"gravity", p.gravity},
             {"damping", p.damping},
             {"dt", p.dt},
             {"workspace_half_width", p.workspace_half_width},
             {"max_force", p.max_force},
             {"k_max", p.k_max},
             {"q_diag", p.q_diag},
             {"r", p.r},
             {"trial_duration", p.trial_duration},
             {"fail_angle_deg", p.fail_angle_deg}};
}

void from_json(const json& j, PlantParams& p) {
    read(j, "cart_mass", p.cart_mass);
    read(j, "pole_mass", p.pole_mass);
    read(j, "half_length", p.half_length);
    read(j, "gravity", p.gravity);
    read(j, "damping", p.damping);
    read(j, "dt", p.dt);
    read(j, "workspace_half_width", p.workspace_half_width);
    read(j, "max_force", p.max_force);
    read(j, "k_max", p.k_max);
    read(j, "q_diag", p.q_diag);
    read(j, "r", p.r);
    read(j, "trial_duration", p.trial_duration);
    read(j, "fail_angle_deg", p.fail_angle_deg);
}

void to_json(json& j, const DisturbanceConfig& d) {
    j = json{{"rate", d.rate}, {"intensity", d.intensity}, {"clamp", d.clamp}};
}

void from_json(const json& j, DisturbanceConfig& d) {
    read(j, "rate", d.rate);
    read(j, "intensity", d.intensity);
    read(j, "clamp", d.clamp);
}

}  // namespace task

namespace gp {

void to_json(json& j, const KernelParams& k) { j = json{{"theta", k.theta}}; }
void from_json(const json& j, KernelParams& k) { read(j, "theta", k.theta); }

void to_json(json& j, const LikelihoodParams& l) {
    j = json{{"c_o", l.c_o}, {"c_p", l.c_p}, {"t1", l.t1}, {"t2", l.t2}};
}

void from_json(const json& j, LikelihoodParams& l) {
    read(j, "c_o", l.c_o);
    read(j, "c_p", l.c_p);
    read(j, "t1", l.t1);
    read(j, "t2", l.t2);
}

void to_json(json& j, const LaplaceOptions& o) {
    j = json{{"gradient_tol", o.gradient_tol}, {"max_iterations", o.max_iterations}};
}

void from_json(const json& j, LaplaceOptions& o) {
    read(j, "gradient_tol", o.gradient_tol);
    read(j, "max_iterations", o.max_iterations);
}

}  // namespace gp

namespace pareto {

void to_json(json& j, const SelectionWindow& w) {
    j = json{{"perf_lo", w.perf_lo}, {"perf_hi", w.perf_hi}, {"chall_lo", w.chall_lo}, {"chall_hi", w.chall_hi}};
}

void from_json(const json& j, SelectionWindow& w) {
    read(j, "perf_lo", w.perf_lo);
    read(j, "perf_hi", w.perf_hi);
    read(j, "chall_lo", w.chall_lo);
    read(j, "chall_hi", w.chall_hi);
}

void to_json(json& j, const ObjectivePoint& p) {
    j = json::array({p.assistance, p.expected_score, p.expected_challenge});
}

void from_json(const json& j, ObjectivePoint& p) {
    if (!j.is_array() || j.size() != 3) throw LogFormatError("front point must be [assistance, score, challenge]");
    p.assistance = j[0].get<double>();
    p.expected_score = j[1].get<double>();
    p.expected_challenge = j[2].get<double>();
}

void to_json(json& j, const ParetoFront& f) {
    j = json{{"front", f.front}, {"all_points", f.all_points}, {"t1", f.t1}, {"t2", f.t2}};
}

void from_json(const json& j, ParetoFront& f) {
    read(j, "front", f.front);
    read(j, "all_points", f.all_points);
    read(j, "t1", f.t1);
    read(j, "t2", f.t2);
}

void to_json(json& j, const ModelCurves& c) {
    j = json{{"grid", c.grid},
             {"score_mean", c.score_mean},
             {"score_std", c.score_std},
             {"chall_mean", c.chall_mean},
             {"chall_std", c.chall_std}};
}

void from_json(const json& j, ModelCurves& c) {
    read(j, "grid", c.grid);
    read(j, "score_mean", c.score_mean);
    read(j, "score_std", c.score_std);
    read(j, "chall_mean", c.chall_mean);
    read(j, "chall_std", c.chall_std);
    c.check_shape();
}

}  // namespace pareto

namespace moo {

void to_json(json& j, const AcqParams& a) { j = json{{"lambda_num", a.lambda_num}, {"lambda_qual", a.lambda_qual}}; }

void from_json(const json& j, AcqParams& a) {
    read(j, "lambda_num", a.lambda_num);
    read(j, "lambda_qual", a.lambda_qual);
}

void to_json(json& j, const CharacterizationConfig& c) {
    j = json{{"iterations", c.iterations},
             {"sobol_iterations", c.sobol_iterations},
             {"num_kernel", c.num_kernel},
             {"qual_kernel", c.qual_kernel},
             {"sigma_w2", c.sigma_w2},
             {"likelihood", c.likelihood},
             {"laplace", c.laplace},
             {"acq", c.acq},
             {"grid_size", c.grid_size},
             {"seed", c.seed}};
}

void from_json(const json& j, CharacterizationConfig& c) {
    read(j, "iterations", c.iterations);
    read(j, "sobol_iterations", c.sobol_iterations);
    read(j, "num_kernel", c.num_kernel);
    read(j, "qual_kernel", c.qual_kernel);
    read(j, "sigma_w2", c.sigma_w2);
    read(j, "likelihood", c.likelihood);
    read(j, "laplace", c.laplace);
    read(j, "acq", c.acq);
    read(j, "grid_size", c.grid_size);
    read(j, "seed", c.seed);
}

void to_json(json& j, const TrialRecord& r) {
    json reasons = json::array();
    for (auto x : r.reasons) reasons.push_back(std::string(task::to_string(x)));
    j = json{{"phase", std::string(to_string(r.phase))},
             {"iteration", r.iteration},
             {"assistance", r.assistance},
             {"sobol", r.sobol},
             {"attempts", r.attempts},
             {"reasons", reasons},
             {"best_index", r.best_index},
             {"best", r.best},
             {"trial_seed", r.trial_seed},
             {"attempt_seeds", r.attempt_seeds},
             {"ordinal_seed", r.ordinal_seed},
             {"pairwise_seed", r.pairwise_seed},
             {"started_at", r.started_at},
             {"finished_at", r.finished_at}};
    j["label"] = r.label ? json(std::string(gp::to_string(*r.label))) : json(nullptr);
    j["preference"] = r.preference ? json(std::string(gp::to_string(*r.preference))) : json(nullptr);
}

void from_json(const json& j, TrialRecord& r) {
    const auto phase = parse_phase(j.at("phase").get<std::string>());
    if (!phase) throw LogFormatError("unknown phase: " + j.at("phase").get<std::string>());
    r.phase = *phase;
    j.at("iteration").get_to(r.iteration);
    j.at("assistance").get_to(r.assistance);
    read(j, "sobol", r.sobol);
    j.at("attempts").get_to(r.attempts);
    const auto& reasons = j.at("reasons");
    if (!reasons.is_array() || reasons.size() != 3) throw LogFormatError("trial record needs three failure reasons");
    for (std::size_t k = 0; k < 3; ++k) {
        const auto reason = task::parse_failure_reason(reasons[k].get<std::string>());
        if (!reason) throw LogFormatError("unknown failure reason: " + reasons[k].get<std::string>());
        r.reasons[k] = *reason;
    }
    j.at("best_index").get_to(r.best_index);
    j.at("best").get_to(r.best);
    j.at("trial_seed").get_to(r.trial_seed);
    j.at("attempt_seeds").get_to(r.attempt_seeds);
    read(j, "ordinal_seed", r.ordinal_seed);
    read(j, "pairwise_seed", r.pairwise_seed);
    read(j, "started_at", r.started_at);
    read(j, "finished_at", r.finished_at);
    r.label.reset();
    r.preference.reset();
    if (j.contains("label") && !j.at("label").is_null()) r.label = label_field(j.at("label"));
    if (j.contains("preference") && !j.at("preference").is_null())
        r.preference = preference_field(j.at("preference"));
    if (r.best_index < 0 || r.best_index > 2 || r.attempts[static_cast<std::size_t>(r.best_index)] != r.best)
        throw LogFormatError("trial record best score does not match its attempts");
}

void to_json(json& j, const ModelSnapshot& s) {
    j = json{{"iteration", s.iteration},
             {"curves", s.curves},
             {"score_mean", s.score_mean},
             {"score_std", s.score_std},
             {"laplace_converged", s.laplace_converged},
             {"laplace_iterations", s.laplace_iterations},
             {"front", s.front}};
}

void from_json(const json& j, ModelSnapshot& s) {
    j.at("iteration").get_to(s.iteration);
    j.at("curves").get_to(s.curves);
    read(j, "score_mean", s.score_mean);
    read(j, "score_std", s.score_std);
    read(j, "laplace_converged", s.laplace_converged);
    read(j, "laplace_iterations", s.laplace_iterations);
    read(j, "front", s.front);
}

}  // namespace moo

}  // namespace hilpareto
