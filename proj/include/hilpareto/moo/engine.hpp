#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hilpareto/gp/kernel.hpp"
#include "hilpareto/gp/numeric_gp.hpp"
#include "hilpareto/gp/qual_gp.hpp"
#include "hilpareto/moo/records.hpp"
#include "hilpareto/moo/user_port.hpp"
#include "hilpareto/pareto/analysis.hpp"
#include "hilpareto/pareto/front.hpp"

namespace hilpareto::moo {

/// First n points of the base-2 one-dimensional Sobol sequence, skipping 0.
std::vector<double> sobol_points(int n);

double ucb(const gp::PosteriorGaussian& post, double lambda);

struct AcqParams {
    double lambda_num = 2.0;
    double lambda_qual = 1.0;

    void validate() const;
};

/// Evenly spaced assistance levels over [0, 1], endpoints included.
struct CandidateGrid {
    std::vector<double> points;

    static CandidateGrid uniform(std::size_t m = 201);
};

struct CharacterizationConfig {
    int iterations = 10;
    int sobol_iterations = 3;
    gp::KernelParams num_kernel;
    gp::KernelParams qual_kernel;
    double sigma_w2 = 0.1;
    gp::LikelihoodParams likelihood;
    gp::LaplaceOptions laplace;
    AcqParams acq;
    std::size_t grid_size = 201;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Both surrogates fitted to the same observations.
struct FittedModels {
    gp::NumericGp num;
    gp::QualGp qual;
};

FittedModels fit_models(const gp::NumericDataset& nd, const gp::QualDataset& qd, const CharacterizationConfig& cfg);

/// Grid points whose (UCB_num, UCB_qual) pairs are non-dominated. Never empty.
std::vector<double> surrogate_pareto_set(const CandidateGrid& grid, const gp::NumericGp& num, const gp::QualGp& qual,
                                         const AcqParams& acq);

/// Same filter on precomputed acquisition pairs, one per grid point.
std::vector<double> surrogate_pareto_set(const CandidateGrid& grid, std::span<const std::pair<double, double>> alpha);

/// Candidate with the largest volume(x); ties go to the smaller level.
double pick_next(std::span<const double> candidates, const std::function<double(double)>& volume);
/// Candidate with the largest sigma_num * sigma_qual; ties go to the smaller level.
double pick_next(std::span<const double> candidates, const gp::NumericGp& num, const gp::QualGp& qual);

/// Posterior curves on the grid: score de-standardized to the raw scale, challenge latent.
pareto::ModelCurves evaluate_curves(const FittedModels& m, std::span<const double> grid);

pareto::ParetoFront extract_front(const FittedModels& m, const CandidateGrid& grid, const gp::LikelihoodParams& lp = {});

/// Model state after one HiL iteration, for logging and live plots.
struct ModelSnapshot {
    int iteration = 0;
    pareto::ModelCurves curves;
    double score_mean = 0.0;  // raw-score standardization constants
    double score_std = 0.0;
    bool laplace_converged = true;
    int laplace_iterations = 0;
    std::vector<pareto::ObjectivePoint> front;
};

/// Observations gathered so far; rebuilding models from them reproduces the fit.
struct Observations {
    gp::NumericDataset numeric;
    gp::QualDataset qualitative;
};

/// Rebuilds the datasets from the records of one HiL phase, in order.
Observations observations_from(std::span<const TrialRecord> records);

struct CharacterizationResult {
    std::vector<TrialRecord> records;
    std::vector<ModelSnapshot> snapshots;
    std::optional<FittedModels> models;
    std::optional<pareto::ParetoFront> front;
    bool completed = false;
    std::string error;  // set when the user port failed mid-run
};

/// Optional hooks for live observers (the service streams these).
struct CharacterizationObserver {
    std::function<void(int iteration, int total)> on_iteration;
    std::function<void(const TrialRecord&)> on_record;
    std::function<void(const ModelSnapshot&)> on_model;
};

/// One HiL phase: Sobol picks, then surrogate-Pareto / maximum-uncertainty picks.
/// Failures of the user port end the run early with completed = false.
CharacterizationResult run_characterization(UserPort& user, const CharacterizationConfig& cfg,
                                            Phase phase = Phase::pre_hil,
                                            const CharacterizationObserver& observer = {});

/// Decision the sampler would take at iteration n (1-based) given earlier records.
struct SamplerDecision {
    double assistance = 0.0;
    bool sobol = false;
    std::vector<double> candidates;  // empty for Sobol picks
};

SamplerDecision next_assistance(std::span<const TrialRecord> earlier, int iteration, const CharacterizationConfig& cfg);

}  // namespace hilpareto::moo
