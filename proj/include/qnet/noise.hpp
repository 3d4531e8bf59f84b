#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "qnet/network.hpp"

namespace qnet {

// Electronic state space convention used throughout: index 0 is the ground
// state |0>, indices 1..N the sites, index N+1 the sink. All rates follow
// the convention in which a jump with rate G moves population at rate 2G.

struct DephasingSpec {
    enum class Mode { Local, Correlated };
    Mode mode = Mode::Local;
    Eigen::VectorXd local_rates;        // length N, each >= 0
    Eigen::MatrixXd correlated_matrix;  // N x N, symmetric PSD

    static DephasingSpec local(const Eigen::VectorXd& rates);
    static DephasingSpec uniform(int n, double rate);
    static DephasingSpec correlated(const Eigen::MatrixXd& gamma);

    int n_sites() const;
    void validate() const;
};

struct DissipationSpec {
    Eigen::VectorXd radiative_rates;  // length N, each >= 0
    int sink_site = 0;                // 1-based; 0 = no sink
    double sink_rate = 0.0;

    static DissipationSpec sink_only(int n, int site, double rate);
    void validate() const;
};

struct LocalModeSpec {
    double mode_frequency = 180.0;  // omega_H, cm^-1
    double huang_rhys = 0.22;       // S_H
    double mode_damping = 0.0;      // Gamma, cm^-1, uniform over modes
    std::vector<int> attached_sites;  // 1-based; empty is invalid
    bool damping_over_two_pi = false; // alternative cm^-1 -> rate convention

    /// g = sqrt(S_H) * omega_H, recomputed on demand.
    double coupling() const;
    void validate(int n_sites) const;
};

struct NoiseSpec {
    std::optional<DephasingSpec> dephasing;
    DissipationSpec dissipation;
    std::optional<LocalModeSpec> modes;
};

// Lindblad contributions on the (N+2)-dimensional electronic space. These
// are the reference (dense) forms; the integrator uses the structured
// GeneratorSet path and is tested against them.

Eigen::MatrixXcd apply_local_dephasing(const Eigen::MatrixXcd& rho,
                                       const DephasingSpec& spec);

/// -sum_mn gamma_mn [A_m, [A_n, rho]] with A_m the site-m number operator.
Eigen::MatrixXcd apply_correlated_dephasing(const Eigen::MatrixXcd& rho,
                                            const Eigen::MatrixXd& gamma);

Eigen::MatrixXcd apply_radiative(const Eigen::MatrixXcd& rho,
                                 const DissipationSpec& spec);

Eigen::MatrixXcd apply_sink(const Eigen::MatrixXcd& rho,
                            const DissipationSpec& spec);

}  // namespace qnet
