#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qnet/units.hpp"

namespace qnet {

using Complex = std::complex<double>;

/// Single-excitation network Hamiltonian over N sites. Site indices are
/// 1-based in every public interface.
struct NetworkHamiltonian {
    int n_sites = 0;
    Eigen::VectorXd energies;   // length N, native units
    Eigen::MatrixXd couplings;  // N x N, symmetric, zero diagonal
    UnitSystem units;
    std::vector<std::string> labels;  // optional, empty or length N

    /// N x N site-basis matrix: diagonal = energies, off-diagonal = couplings.
    Eigen::MatrixXd site_matrix() const;

    void validate() const;
};

/// Fully-connected network with a common coupling on every site pair.
NetworkHamiltonian build_fcn(int n, double j_coupling,
                             const Eigen::VectorXd& energies);

/// Uniform FCN with all site energies zero.
NetworkHamiltonian build_fcn(int n, double j_coupling);

/// Site energies drawn uniformly from [0, 1) with a reproducible seed.
Eigen::VectorXd disordered_energies(int n, std::uint64_t seed);

struct BasisTransform {
    Eigen::MatrixXcd unitary;  // N x N, U U^dag = I
    std::string description;

    void validate() const;
};

/// Transform mixing sites i and j (1-based) into (|i> +- |j>)/sqrt(2),
/// identity elsewhere. Real, symmetric, involutive.
BasisTransform hybrid_transform(int i, int j, int n_sites);

/// Returns U H U^dag for an N x N Hamiltonian matrix.
Eigen::MatrixXcd transform_hamiltonian(const Eigen::MatrixXcd& h,
                                       const BasisTransform& u);

/// Returns a copy with entries (a,b) and (b,a) set so the result stays
/// Hermitian; indices 1-based. Used for pathway surgery in any basis.
Eigen::MatrixXcd edit_coupling(const Eigen::MatrixXcd& h, int state_a,
                               int state_b, Complex new_value);

struct FmoSystem {
    NetworkHamiltonian hamiltonian;  // N = 7, spectroscopic units
    int source_site = 1;
    int sink_site = 3;
    double sink_rate = 0.0;       // ps^-1
    double radiative_rate = 0.0;  // ps^-1, per site

    void validate() const;
};

/// Bundled 7-site FMO monomer (P. aestuarii) in cm^-1, with the calibrated
/// sink rate and the radiative rate from the 1 ns exciton lifetime.
FmoSystem fmo_paestuarii();

/// JSON network file I/O; schema documented in README.
NetworkHamiltonian load_network(const std::string& path);
void save_network(const NetworkHamiltonian& h, const std::string& path,
                  const std::string& provenance = "");

/// Loads a network file that also carries sink/source metadata.
FmoSystem load_fmo(const std::string& path);
void save_fmo(const FmoSystem& sys, const std::string& path,
              const std::string& provenance = "");

}  // namespace qnet
