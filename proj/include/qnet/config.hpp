#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qnet/analysis.hpp"
#include "qnet/optimize.hpp"

namespace qnet {

/// One JSON schema shared by every CLI command; see README for the layout.
struct RunConfig {
    NetworkHamiltonian network;
    DissipationSpec dissipation;
    std::optional<DephasingSpec> dephasing;
    std::optional<LocalModeSpec> modes;
    Eigen::VectorXcd initial_state;  // amplitudes over sites
    IntegratorConfig integrator;
    std::uint64_t seed = 0;
    std::string name = "run";

    // sweep block
    struct Sweep {
        std::string parameter;  // "dephasing_uniform" | "mode_damping"
        std::vector<double> grid;
        double t_fixed = 0.0;
    };
    std::optional<Sweep> sweep;

    // optimize block
    struct Optimize {
        std::string free = "local";  // "local" | "correlated"
        std::vector<int> sites;
        double target_time = 5.0;
        std::pair<double, double> log10_bounds{-3.0, 3.0};
        int restarts = 16;
        int max_evals = 400;
        std::vector<double> initial_guess;
    };
    std::optional<Optimize> optimize;

    // analysis blocks
    int invariant_sink_site = 0;  // 0 = use the dissipation sink site
    PathwayOptions pathways;

    OptimizationProblem to_problem() const;
    NoiseSpec to_noise() const;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Bundled presets: fcn7, fcn7_disorder, fmo, fmo_optimized, fmo_sites12,
/// fmo_correlated, fmo_modes.
std::vector<std::string> preset_names();
nlohmann::json preset_config(const std::string& name);

}  // namespace qnet
