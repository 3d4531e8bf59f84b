#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qnet/generators.hpp"
#include "qnet/propagate.hpp"

namespace qnet {

/// Plain Nelder-Mead simplex, maximizing. Points are clamped into the
/// bounds before every evaluation, so only feasible points are scored.
struct SimplexOptions {
    int max_evals = 400;
    double initial_step = 0.5;
    double f_tolerance = 1e-9;
};

struct SimplexTrace {
    std::vector<std::pair<int, double>> best_so_far;  // (evals, objective)
    std::vector<double> best_x;
    double best_f = 0.0;
    int evals = 0;
};

SimplexTrace nelder_mead_maximize(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, const std::vector<double>& lower,
    const std::vector<double>& upper, const SimplexOptions& opts);

struct OptimizationProblem {
    NetworkHamiltonian network;
    DissipationSpec dissipation;  // sink + radiative baseline
    enum class Free { LocalRates, CorrelatedMatrix };
    Free free_parameters = Free::LocalRates;
    std::vector<int> site_subset;  // LocalRates only; empty = all sites
    double target_time = 5.0;
    std::pair<double, double> log10_bounds{-3.0, 3.0};  // rates, ps^-1
    int restarts = 16;
    int max_evals = 400;  // per restart
    std::uint64_t seed = 0;
    std::vector<double> initial_guess;  // optional warm start (restart 0)
    IntegratorConfig integrator;        // t_final ignored, target_time used

    std::vector<int> effective_sites() const;
};

struct RestartTrace {
    SimplexTrace trace;
    std::vector<double> start;
};

struct OptimizationResult {
    std::vector<double> best_parameters;  // log10 rates or L entries
    double best_objective = 0.0;
    int best_restart = 0;
    long total_evaluations = 0;
    std::uint64_t seed = 0;
    std::vector<RestartTrace> restarts;

    /// Optimized per-site dephasing rates in ps^-1 (LocalRates problems).
    Eigen::VectorXd local_rates(const OptimizationProblem& p) const;
    /// Optimized correlated matrix gamma = L L^T (CorrelatedMatrix problems).
    Eigen::MatrixXd correlated_matrix(const OptimizationProblem& p) const;

    void to_json(const std::string& path,
                 const OptimizationProblem& p) const;
};

/// p_sink(target_time) for the problem's system under the given dephasing.
double dephasing_objective(const OptimizationProblem& p,
                           const DephasingSpec& spec);

OptimizationResult optimize_local(const OptimizationProblem& p);
OptimizationResult optimize_correlated(const OptimizationProblem& p);

/// Uniform-dephasing sweep: one evolve per grid point, deterministic order.
std::vector<std::pair<double, double>> dephasing_sweep(
    const NetworkHamiltonian& h, const DissipationSpec& dissipation,
    const std::vector<double>& gamma_grid, double t_fixed,
    const IntegratorConfig& integrator = {});

struct RobustnessRow {
    std::string label;
    double objective;
};

/// Rescales the optimal rates by each factor, per site and jointly, and
/// re-scores; also perturbs the site energies by +-5%.
std::vector<RobustnessRow> robustness_scan(
    const OptimizationProblem& p, const std::vector<double>& best_parameters,
    const std::vector<double>& factors);

}  // namespace qnet
