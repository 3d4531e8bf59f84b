#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qnet/generators.hpp"

namespace qnet {

struct DensityMatrix {
    Eigen::MatrixXcd rho;
    int n_sites = 0;
    int n_modes = 0;

    int dim() const { return static_cast<int>(rho.rows()); }
    void validate() const;  // Hermitian, unit trace, positive
};

/// Single excitation on `site` (1-based), modes (if any) in their ground
/// state.
DensityMatrix site_excitation(int n_sites, int site, int n_modes = 0);

/// Pure state from an amplitude vector over the N sites.
DensityMatrix pure_site_state(const Eigen::VectorXcd& amplitudes,
                              int n_modes = 0);

struct IntegratorConfig {
    double dt = 0.0;       // 0 = pick the unit-system default
    double t_final = 0.0;
    int record_stride = 10;
    double tolerance = 1e-6;  // acceptance guard on p_sink(t_final)
    int positivity_check_stride = 0;  // steps; 0 = auto (~5 checks per run)
    bool check_convergence = true;
    std::optional<std::pair<int, int>> hybrid_pair;  // record |+->/|-> pops
    std::pair<int, int> coherence_pair{1, 2};

    void validate() const;
};

inline constexpr double kDefaultDtSpectroscopic = 1e-3;  // 1 fs
inline constexpr double kDefaultDtDimensionless = 0.01;

struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> site_populations;
    std::vector<double> ground_population;
    std::vector<double> sink_population;           // direct readout
    std::vector<double> sink_population_integral;  // 2*G*int rho_kk dt'
    std::vector<Complex> coherence;                // recorded site pair
    std::vector<double> p_plus, p_minus;           // when hybrid pair set
    bool has_hybrid = false;
    Eigen::VectorXd mode_excitation_max;  // per mode, over the whole run
    std::pair<int, int> coherence_pair{1, 2};

    double final_sink() const { return sink_population.back(); }
    /// p_sink linearly interpolated at time t.
    double sink_at(double t) const;
    /// Last time |coherence| was at or above the threshold (0 if never).
    double coherence_lifetime(double threshold = 0.01) const;

    void to_csv(const std::string& path) const;
    void to_json(const std::string& path) const;
};

/// Full master-equation right-hand side for a Hermitian state.
Eigen::MatrixXcd rhs(const Eigen::MatrixXcd& rho, const GeneratorSet& gens);

/// Classical fixed-step 4th-order integration. When check_convergence is
/// set the run is re-done at dt/2 and accepted only if p_sink(t_final)
/// moves by less than the configured tolerance.
Trajectory evolve(const DensityMatrix& rho0, const GeneratorSet& gens,
                  const IntegratorConfig& config);

/// Both sink-population accountings, per recorded sample.
std::vector<std::pair<double, double>> sink_population_dual(
    const Trajectory& traj);

/// Partial trace over all mode factors.
DensityMatrix reduced_electronic_state(const DensityMatrix& extended);

}  // namespace qnet
