#include "hilpareto/moo/engine.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>

#include "hilpareto/common/errors.hpp"
#include "hilpareto/common/random.hpp"

namespace hilpareto::moo {

namespace {

constexpr std::uint64_t kOrdinalStream = 1;
constexpr std::uint64_t kPairwiseStream = 2;

}  // namespace

std::vector<double> sobol_points(int n) {
    if (n < 1) throw std::invalid_argument("sobol_points: n must be >= 1");
    // Gray-code construction with direction numbers v_k = 2^(32-k).
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    std::uint32_t x = 0;
    for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(n); ++i) {
        std::uint32_t c = 0;
        while ((i >> c) & 1u) ++c;
        x ^= 1u << (31 - c);
        out.push_back(static_cast<double>(x) * 0x1.0p-32);
    }
    return out;
}

double ucb(const gp::PosteriorGaussian& post, double lambda) {
    if (!(post.variance >= 0.0)) throw std::invalid_argument("ucb: negative variance");
    return post.mean + lambda * std::sqrt(post.variance);
}

void AcqParams::validate() const {
    if (!(lambda_num >= 0.0) || !(lambda_qual >= 0.0))
        throw ConfigError("acquisition weights must be >= 0");
}

CandidateGrid CandidateGrid::uniform(std::size_t m) {
    if (m < 2) throw std::invalid_argument("CandidateGrid: need at least two points");
    CandidateGrid g;
    g.points.resize(m);
    for (std::size_t i = 0; i < m; ++i) g.points[i] = static_cast<double>(i) / static_cast<double>(m - 1);
    return g;
}

void CharacterizationConfig::validate() const {
    if (!(sobol_iterations >= 1 && sobol_iterations < iterations))
        throw ConfigError("characterization: need 1 <= sobol_iterations < iterations");
    if (!(sigma_w2 >= 0.0)) throw ConfigError("characterization: sigma_w2 must be >= 0");
    if (grid_size < 2) throw ConfigError("characterization: grid_size must be >= 2");
    num_kernel.validate();
    qual_kernel.validate();
    likelihood.validate();
    acq.validate();
}

FittedModels fit_models(const gp::NumericDataset& nd, const gp::QualDataset& qd, const CharacterizationConfig& cfg) {
    return FittedModels{gp::NumericGp(nd, cfg.sigma_w2, cfg.num_kernel),
                        gp::QualGp(gp::fit_laplace(qd, cfg.qual_kernel, cfg.likelihood, cfg.laplace), cfg.qual_kernel)};
}

std::vector<double> surrogate_pareto_set(const CandidateGrid& grid, std::span<const std::pair<double, double>> alpha) {
    if (alpha.size() != grid.points.size()) throw std::invalid_argument("surrogate_pareto_set: size mismatch");
    std::vector<double> out;
    for (std::size_t i : pareto::non_dominated(alpha)) out.push_back(grid.points[i]);
    return out;
}

std::vector<double> surrogate_pareto_set(const CandidateGrid& grid, const gp::NumericGp& num, const gp::QualGp& qual,
                                         const AcqParams& acq) {
    std::vector<std::pair<double, double>> alpha;
    alpha.reserve(grid.points.size());
    for (double x : grid.points) alpha.emplace_back(ucb(num.predict(x), acq.lambda_num), ucb(qual.predict(x), acq.lambda_qual));
    return surrogate_pareto_set(grid, alpha);
}

double pick_next(std::span<const double> candidates, const std::function<double(double)>& volume) {
    if (candidates.empty()) throw std::invalid_argument("pick_next: empty candidate set");
    double best_x = candidates[0];
    double best_v = -1.0;
    for (double x : candidates) {
        const double v = volume(x);
        if (v > best_v || (v == best_v && x < best_x)) {
            best_v = v;
            best_x = x;
        }
    }
    return best_x;
}

double pick_next(std::span<const double> candidates, const gp::NumericGp& num, const gp::QualGp& qual) {
    return pick_next(candidates, [&](double x) { return num.predict(x).stddev() * qual.predict(x).stddev(); });
}

pareto::ModelCurves evaluate_curves(const FittedModels& m, std::span<const double> grid) {
    pareto::ModelCurves c;
    c.grid.assign(grid.begin(), grid.end());
    const auto& data = m.num.data();
    for (double x : grid) {
        const auto pn = m.num.predict(x);
        const auto pq = m.qual.predict(x);
        c.score_mean.push_back(data.to_raw(pn.mean));
        c.score_std.push_back(data.score_std() * pn.stddev());
        c.chall_mean.push_back(pq.mean);
        c.chall_std.push_back(pq.stddev());
    }
    return c;
}

pareto::ParetoFront extract_front(const FittedModels& m, const CandidateGrid& grid, const gp::LikelihoodParams& lp) {
    return pareto::front_from_curves(evaluate_curves(m, grid.points), lp.t1, lp.t2);
}

Observations observations_from(std::span<const TrialRecord> records) {
    Observations obs;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const TrialRecord& r = records[i];
        obs.numeric.append(r.assistance, r.best);
        if (r.label) obs.qualitative.ordinal.push_back({r.assistance, *r.label});
        if (r.preference) {
            if (i == 0) throw LogFormatError("pairwise preference on the first trial of a phase");
            obs.qualitative.pairwise.push_back({records[i - 1].assistance, r.assistance, *r.preference});
        }
    }
    return obs;
}

SamplerDecision next_assistance(std::span<const TrialRecord> earlier, int iteration, const CharacterizationConfig& cfg) {
    SamplerDecision d;
    if (iteration <= cfg.sobol_iterations) {
        d.sobol = true;
        d.assistance = sobol_points(iteration).back();
        return d;
    }
    const Observations obs = observations_from(earlier);
    const FittedModels m = fit_models(obs.numeric, obs.qualitative, cfg);
    d.candidates = surrogate_pareto_set(CandidateGrid::uniform(cfg.grid_size), m.num, m.qual, cfg.acq);
    d.assistance = pick_next(d.candidates, m.num, m.qual);
    return d;
}

namespace {

ModelSnapshot snapshot(int iteration, const FittedModels& m, const CandidateGrid& grid,
                       const gp::LikelihoodParams& lp) {
    ModelSnapshot s;
    s.iteration = iteration;
    s.curves = evaluate_curves(m, grid.points);
    s.score_mean = m.num.data().score_mean();
    s.score_std = m.num.data().score_std();
    s.laplace_converged = m.qual.fit().converged;
    s.laplace_iterations = m.qual.fit().iterations;
    s.front = pareto::front_from_curves(s.curves, lp.t1, lp.t2).front;
    return s;
}

}  // namespace

CharacterizationResult run_characterization(UserPort& user, const CharacterizationConfig& cfg, Phase phase,
                                            const CharacterizationObserver& observer) {
    cfg.validate();
    const CandidateGrid grid = CandidateGrid::uniform(cfg.grid_size);
    const std::vector<double> sobol = sobol_points(cfg.sobol_iterations);
    CharacterizationResult out;
    Observations obs;
    std::optional<FittedModels> models;

    try {
        for (int n = 1; n <= cfg.iterations; ++n) {
            if (observer.on_iteration) observer.on_iteration(n, cfg.iterations);
            TrialRecord r;
            r.phase = phase;
            r.iteration = n;
            if (n <= cfg.sobol_iterations) {
                r.sobol = true;
                r.assistance = sobol[static_cast<std::size_t>(n - 1)];
            } else {
                const auto candidates = surrogate_pareto_set(grid, models->num, models->qual, cfg.acq);
                r.assistance = pick_next(candidates, models->num, models->qual);
            }
            r.trial_seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(n)});
            r.attempt_seeds = task::attempt_seeds(r.trial_seed);
            r.ordinal_seed = derive_seed(r.trial_seed, {kOrdinalStream});
            r.started_at = utc_timestamp();

            const task::BestOfThree played =
                user.play(r.assistance, std::span<const std::uint64_t, 3>(r.attempt_seeds));
            for (std::size_t k = 0; k < 3; ++k) {
                r.attempts[k] = played.attempts[k].score;
                r.reasons[k] = played.attempts[k].reason;
            }
            r.best_index = static_cast<int>(played.best_index);
            r.best = played.best().score;

            r.label = user.rate(r.assistance, r.ordinal_seed);
            if (n >= 2) {
                r.pairwise_seed = derive_seed(r.trial_seed, {kPairwiseStream});
                const double prev = out.records.back().assistance;
                r.preference = user.compare(prev, r.assistance, r.pairwise_seed);
                obs.qualitative.pairwise.push_back({prev, r.assistance, *r.preference});
            }
            r.finished_at = utc_timestamp();

            obs.numeric.append(r.assistance, r.best);
            obs.qualitative.ordinal.push_back({r.assistance, *r.label});
            out.records.push_back(r);
            if (observer.on_record) observer.on_record(r);

            models.emplace(fit_models(obs.numeric, obs.qualitative, cfg));
            out.snapshots.push_back(snapshot(n, *models, grid, cfg.likelihood));
            if (observer.on_model) observer.on_model(out.snapshots.back());
        }
        out.completed = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    if (models) {
        out.front = extract_front(*models, grid, cfg.likelihood);
        out.models = std::move(models);
    }
    return out;
}

}  // namespace hilpareto::moo
