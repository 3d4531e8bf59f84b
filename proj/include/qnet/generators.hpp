#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <optional>
#include <vector>

#include "qnet/noise.hpp"

namespace qnet {

using SparseCd = Eigen::SparseMatrix<Complex>;

/// Population transfer 2*rate * rho[src block] into the dst block
/// (radiative decay to ground, sink trapping).
struct TransferTerm {
    double rate;
    int src_el;
    int dst_el;
};

/// Two-level mode lowering a_b at the given bit of the mode register.
struct ModeDampTerm {
    double rate;
    int bit;
};

/// Dephasing-type dissipator with a real diagonal jump operator.
struct DiagDissipator {
    double rate;
    Eigen::VectorXd diag;  // full-space diagonal of the jump operator
};

/// Arbitrary jump operator; used for basis-transformed generator sets.
struct GenericJump {
    double rate;
    SparseCd op;
};

/// Contiguous run of drift entries at a fixed row-column offset, applied as
/// a block-row axpy (and a block-column axpy for the adjoint part).
struct BlockAxpy {
    int dst;
    int src;
    int len;
    Complex coeff;
};

struct ModeLayout {
    int n_modes = 0;
    std::vector<int> sites;       // attached sites, 1-based, sites[bit]
    double omega_angular = 0.0;   // mode frequency, rad/time
    double coupling_angular = 0.0;
    double damping_rate = 0.0;    // converted rate
};

/// Full dissipative generator: Hamiltonian commutator plus all Lindblad
/// terms, held in a structured sparse form sized for the mode-extended
/// 1152-dimensional space. Immutable after construction.
struct GeneratorSet {
    int n_sites = 0;
    int dim_el = 0;  // n_sites + 2
    int dim = 0;     // dim_el * 2^n_modes
    int sink_site = 0;
    double sink_rate = 0.0;
    UnitSystem units;

    SparseCd hamiltonian;  // full H, angular units

    // Fast-path pieces assembled by finalize():
    SparseCd drift_offdiag;      // -i*offdiag(H) - offdiag(sum rate*L^dag L)
    std::vector<BlockAxpy> drift_blocks;  // same entries, run-length grouped
    Eigen::MatrixXcd elementwise;  // per-entry factor covering all diagonal parts
    std::vector<TransferTerm> transfers;
    std::vector<ModeDampTerm> mode_damps;
    std::vector<GenericJump> generic_jumps;
    std::vector<DiagDissipator> diag_dissipators;

    std::optional<ModeLayout> modes;

    // Precomputed index lists (one per damped mode) of states with that
    // mode excited; built by finalize().
    std::vector<std::vector<int>> damp_indices;

    int mode_dim() const { return modes ? (1 << modes->n_modes) : 1; }

    /// Right-hand side contribution of the full generator for a Hermitian
    /// input; allocates the result.
    Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const;

    /// Allocation-free variant; `scratch` must match rho's shape.
    void apply_into(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out,
                    Eigen::MatrixXcd& scratch) const;

    /// Population of electronic level `el` (trace over modes).
    double electronic_population(const Eigen::MatrixXcd& rho, int el) const;
    /// Mode-traced coherence <el_a| tr_modes rho |el_b>.
    Complex electronic_coherence(const Eigen::MatrixXcd& rho, int el_a,
                                 int el_b) const;
    /// Occupation of the mode at `bit`.
    double mode_occupation(const Eigen::MatrixXcd& rho, int bit) const;
};

/// Electronic-only generator set (no modes) from a network plus noise spec.
/// Energies/couplings are converted to angular units; Markovian rates are
/// taken as given (ps^-1 or dimensionless to match the unit system).
GeneratorSet build_generators(const NetworkHamiltonian& h,
                              const NoiseSpec& noise);

/// Mode-extended generator set on the electronic (x) two-level-mode space.
/// Hard cap on the total dimension; exceeding it raises CapacityError.
inline constexpr int kDimensionCap = 2048;
GeneratorSet extend_with_modes(const NetworkHamiltonian& h,
                               const NoiseSpec& noise,
                               const LocalModeSpec& modes);

/// Conjugates an electronic-only generator set by a site-basis transform;
/// dissipators become generic jumps. Used for basis-covariance checks.
GeneratorSet transform_generators(const GeneratorSet& gens,
                                  const BasisTransform& u);

GeneratorSet generators_for(const FmoSystem& sys,
                            const std::optional<DephasingSpec>& deph = {},
                            const std::optional<LocalModeSpec>& modes = {});

}  // namespace qnet
