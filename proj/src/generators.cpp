#include "qnet/generators.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "qnet/errors.hpp"
#include "qnet/units.hpp"

namespace qnet {

namespace {

constexpr Complex kI{0.0, 1.0};

/// Assembles the fast-path pieces from the term lists and the Hamiltonian.
void finalize(GeneratorSet& g) {
    const int dim = g.dim;
    const int mdim = g.mode_dim();

    Eigen::VectorXcd h_diag = Eigen::VectorXcd::Zero(dim);
    std::vector<Eigen::Triplet<Complex>> off;
    for (int c = 0; c < g.hamiltonian.outerSize(); ++c) {
        for (SparseCd::InnerIterator it(g.hamiltonian, c); it; ++it) {
            if (it.row() == it.col())
                h_diag[it.row()] += it.value();
            else
                off.emplace_back(static_cast<int>(it.row()), c,
                                 -kI * it.value());
        }
    }

    // Anticommutator diagonals: transfers and mode damping have diagonal
    // L^dag L; generic jumps may not, their off-diagonal part joins the
    // drift term.
    Eigen::VectorXd decay_diag = Eigen::VectorXd::Zero(dim);
    for (const auto& t : g.transfers)
        decay_diag.segment(t.src_el * mdim, mdim).array() += t.rate;
    for (const auto& d : g.mode_damps)
        for (int i = 0; i < dim; ++i)
            if ((i % mdim) & (1 << d.bit)) decay_diag[i] += d.rate;
    for (const auto& j : g.generic_jumps) {
        SparseCd k = (j.op.adjoint() * j.op).pruned();
        for (int c = 0; c < k.outerSize(); ++c) {
            for (SparseCd::InnerIterator it(k, c); it; ++it) {
                if (it.row() == it.col())
                    decay_diag[it.row()] += j.rate * it.value().real();
                else
                    off.emplace_back(static_cast<int>(it.row()), c,
                                     -j.rate * it.value());
            }
        }
    }

    g.drift_offdiag.resize(dim, dim);
    g.drift_offdiag.setFromTriplets(off.begin(), off.end());
    g.drift_offdiag.makeCompressed();

    // Group the drift entries into runs of consecutive rows at a fixed
    // row-column offset and value; each run becomes one vectorized block
    // axpy instead of a scattered sparse-product update.
    struct Entry {
        int r, c;
        Complex v;
    };
    std::vector<Entry> entries;
    entries.reserve(g.drift_offdiag.nonZeros());
    for (int c = 0; c < g.drift_offdiag.outerSize(); ++c)
        for (SparseCd::InnerIterator it(g.drift_offdiag, c); it; ++it)
            entries.push_back({static_cast<int>(it.row()), c, it.value()});
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        const int da = a.r - a.c, db = b.r - b.c;
        return da != db ? da < db : a.r < b.r;
    });
    g.drift_blocks.clear();
    for (const auto& e : entries) {
        BlockAxpy* last = g.drift_blocks.empty() ? nullptr : &g.drift_blocks.back();
        if (last && e.r - e.c == last->dst - last->src &&
            e.r == last->dst + last->len && e.v == last->coeff) {
            ++last->len;
        } else {
            g.drift_blocks.push_back({e.r, e.c, 1, e.v});
        }
    }

    g.elementwise.resize(dim, dim);
    for (int c = 0; c < dim; ++c) {
        for (int r = 0; r < dim; ++r) {
            Complex v = -kI * (h_diag[r] - h_diag[c]);
            v -= decay_diag[r] + decay_diag[c];
            g.elementwise(r, c) = v;
        }
    }
    for (const auto& d : g.diag_dissipators) {
        for (int c = 0; c < dim; ++c) {
            for (int r = 0; r < dim; ++r) {
                const double diff = d.diag[r] - d.diag[c];
                g.elementwise(r, c) -= d.rate * diff * diff;
            }
        }
    }

    g.damp_indices.clear();
    for (const auto& d : g.mode_damps) {
        std::vector<int> idx;
        idx.reserve(dim / 2);
        for (int i = 0; i < dim; ++i)
            if ((i % mdim) & (1 << d.bit)) idx.push_back(i);
        g.damp_indices.push_back(std::move(idx));
    }
}

/// Splits a PSD matrix into rank-1 factors gamma = sum_a b_a b_a^T,
/// dropping numerically-zero directions.
std::vector<Eigen::VectorXd> psd_factors(const Eigen::MatrixXd& gamma) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gamma);
    std::vector<Eigen::VectorXd> out;
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    for (int a = 0; a < gamma.rows(); ++a) {
        const double lam = es.eigenvalues()[a];
        if (lam <= scale * 1e-14) continue;
        out.push_back(std::sqrt(lam) * es.eigenvectors().col(a));
    }
    return out;
}

void add_dephasing(GeneratorSet& g, const DephasingSpec& spec) {
    spec.validate();
    if (spec.n_sites() != g.n_sites)
        throw DimensionMismatch("dephasing spec does not match network");
    const int mdim = g.mode_dim();
    auto site_diag = [&](const Eigen::VectorXd& weights) {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(g.dim);
        for (int j = 1; j <= g.n_sites; ++j)
            d.segment(j * mdim, mdim).array() = weights[j - 1];
        return d;
    };
    if (spec.mode == DephasingSpec::Mode::Local) {
        for (int j = 1; j <= g.n_sites; ++j) {
            if (spec.local_rates[j - 1] == 0.0) continue;
            Eigen::VectorXd w = Eigen::VectorXd::Zero(g.n_sites);
            w[j - 1] = 1.0;
            g.diag_dissipators.push_back({spec.local_rates[j - 1], site_diag(w)});
        }
    } else {
        for (const auto& b : psd_factors(spec.correlated_matrix))
            g.diag_dissipators.push_back({1.0, site_diag(b)});
    }
}

void add_dissipation(GeneratorSet& g, const DissipationSpec& spec) {
    spec.validate();
    if (spec.radiative_rates.size() != g.n_sites)
        throw DimensionMismatch("dissipation spec does not match network");
    for (int j = 1; j <= g.n_sites; ++j)
        if (spec.radiative_rates[j - 1] > 0.0)
            g.transfers.push_back({spec.radiative_rates[j - 1], j, 0});
    if (spec.sink_site != 0) {
        g.sink_site = spec.sink_site;
        g.sink_rate = spec.sink_rate;
        g.transfers.push_back({spec.sink_rate, spec.sink_site, g.n_sites + 1});
    }
}

SparseCd electronic_hamiltonian(const NetworkHamiltonian& h) {
    const double k = h.units.energy_to_angular();
    const int dim = h.n_sites + 2;
    std::vector<Eigen::Triplet<Complex>> trip;
    for (int j = 1; j <= h.n_sites; ++j) {
        if (h.energies[j - 1] != 0.0)
            trip.emplace_back(j, j, Complex(k * h.energies[j - 1], 0.0));
        for (int l = 1; l <= h.n_sites; ++l) {
            const double v = h.couplings(j - 1, l - 1);
            if (j != l && v != 0.0) trip.emplace_back(j, l, Complex(k * v, 0.0));
        }
    }
    SparseCd out(dim, dim);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

}  // namespace

GeneratorSet build_generators(const NetworkHamiltonian& h,
                              const NoiseSpec& noise) {
    h.validate();
    if (noise.modes) return extend_with_modes(h, noise, *noise.modes);
    GeneratorSet g;
    g.n_sites = h.n_sites;
    g.dim_el = h.n_sites + 2;
    g.dim = g.dim_el;
    g.units = h.units;
    g.hamiltonian = electronic_hamiltonian(h);
    if (noise.dephasing) add_dephasing(g, *noise.dephasing);
    add_dissipation(g, noise.dissipation);
    finalize(g);
    return g;
}

GeneratorSet extend_with_modes(const NetworkHamiltonian& h,
                               const NoiseSpec& noise,
                               const LocalModeSpec& modes) {
    h.validate();
    modes.validate(h.n_sites);
    const int m = static_cast<int>(modes.attached_sites.size());
    const int dim_el = h.n_sites + 2;
    if (m >= 31 || (static_cast<long>(dim_el) << m) > kDimensionCap)
        throw CapacityError("mode-extended space exceeds the dimension cap; "
                            "reduce attached_sites");
    GeneratorSet g;
    g.n_sites = h.n_sites;
    g.dim_el = dim_el;
    g.units = h.units;
    const int mdim = 1 << m;
    g.dim = dim_el * mdim;

    ModeLayout layout;
    layout.n_modes = m;
    layout.sites = modes.attached_sites;
    const double k = h.units.energy_to_angular();
    layout.omega_angular = k * modes.mode_frequency;
    layout.coupling_angular = k * modes.coupling();
    layout.damping_rate =
        h.units.kind == UnitKind::Spectroscopic
            ? rate_from_wavenumber(modes.mode_damping, modes.damping_over_two_pi)
            : modes.mode_damping;
    g.modes = layout;

    // Global index = el * 2^m + mode bits; bit b belongs to sites[b].
    std::vector<Eigen::Triplet<Complex>> trip;
    const SparseCd h_el = electronic_hamiltonian(h);
    for (int c = 0; c < h_el.outerSize(); ++c)
        for (SparseCd::InnerIterator it(h_el, c); it; ++it)
            for (int mm = 0; mm < mdim; ++mm)
                trip.emplace_back(static_cast<int>(it.row()) * mdim + mm,
                                  c * mdim + mm, it.value());
    for (int gidx = 0; gidx < g.dim; ++gidx) {
        const int mm = gidx % mdim;
        const int nexc = __builtin_popcount(static_cast<unsigned>(mm));
        if (nexc > 0)
            trip.emplace_back(gidx, gidx,
                              Complex(layout.omega_angular * nexc, 0.0));
    }
    for (int b = 0; b < m; ++b) {
        const int s = modes.attached_sites[b];
        for (int mm = 0; mm < mdim; ++mm)
            trip.emplace_back(s * mdim + mm, s * mdim + (mm ^ (1 << b)),
                              Complex(layout.coupling_angular, 0.0));
    }
    g.hamiltonian.resize(g.dim, g.dim);
    g.hamiltonian.setFromTriplets(trip.begin(), trip.end());

    if (noise.dephasing) add_dephasing(g, *noise.dephasing);
    add_dissipation(g, noise.dissipation);
    if (layout.damping_rate > 0.0)
        for (int b = 0; b < m; ++b)
            g.mode_damps.push_back({layout.damping_rate, b});
    finalize(g);
    return g;
}

GeneratorSet transform_generators(const GeneratorSet& gens,
                                  const BasisTransform& u) {
    if (gens.modes)
        throw BasisError("cannot transform a mode-extended generator set");
    u.validate();
    if (u.unitary.rows() != gens.n_sites)
        throw DimensionMismatch("transform does not match network size");
    const int dim = gens.dim;
    Eigen::MatrixXcd ufull = Eigen::MatrixXcd::Identity(dim, dim);
    ufull.block(1, 1, gens.n_sites, gens.n_sites) = u.unitary;

    GeneratorSet g;
    g.n_sites = gens.n_sites;
    g.dim_el = gens.dim_el;
    g.dim = dim;
    g.sink_site = gens.sink_site;
    g.sink_rate = gens.sink_rate;
    g.units = gens.units;
    Eigen::MatrixXcd hd =
        ufull * Eigen::MatrixXcd(gens.hamiltonian) * ufull.adjoint();
    g.hamiltonian = hd.sparseView(1.0, 1e-14);

    auto push_jump = [&](double rate, const Eigen::MatrixXcd& op) {
        Eigen::MatrixXcd t = ufull * op * ufull.adjoint();
        g.generic_jumps.push_back({rate, SparseCd(t.sparseView(1.0, 1e-14))});
    };
    for (const auto& t : gens.transfers) {
        Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(dim, dim);
        op(t.dst_el, t.src_el) = 1.0;
        push_jump(t.rate, op);
    }
    for (const auto& d : gens.diag_dissipators)
        push_jump(d.rate, Eigen::MatrixXcd(d.diag.cast<Complex>().asDiagonal()));
    for (const auto& j : gens.generic_jumps)
        push_jump(j.rate, Eigen::MatrixXcd(j.op));
    finalize(g);
    return g;
}

GeneratorSet generators_for(const FmoSystem& sys,
                            const std::optional<DephasingSpec>& deph,
                            const std::optional<LocalModeSpec>& modes) {
    sys.validate();
    NoiseSpec noise;
    noise.dephasing = deph;
    noise.dissipation.radiative_rates =
        Eigen::VectorXd::Constant(sys.hamiltonian.n_sites, sys.radiative_rate);
    noise.dissipation.sink_site = sys.sink_site;
    noise.dissipation.sink_rate = sys.sink_rate;
    noise.modes = modes;
    return build_generators(sys.hamiltonian, noise);
}

void GeneratorSet::apply_into(const Eigen::MatrixXcd& rho,
                              Eigen::MatrixXcd& out,
                              Eigen::MatrixXcd& scratch) const {
    if (rho.rows() != dim || rho.cols() != dim)
        throw DimensionMismatch("state does not match generator dimension");
    out = elementwise.cwiseProduct(rho);
    // rho is Hermitian throughout the integration, so the adjoint drift
    // contribution rho A^dag lands as column-block axpys with conj(coeff).
    for (const auto& b : drift_blocks) {
        out.middleRows(b.dst, b.len).noalias() +=
            b.coeff * rho.middleRows(b.src, b.len);
        out.middleCols(b.dst, b.len).noalias() +=
            std::conj(b.coeff) * rho.middleCols(b.src, b.len);
    }

    const int mdim = mode_dim();
    for (const auto& t : transfers) {
        out.block(t.dst_el * mdim, t.dst_el * mdim, mdim, mdim) +=
            2.0 * t.rate * rho.block(t.src_el * mdim, t.src_el * mdim, mdim, mdim);
    }
    for (std::size_t d = 0; d < mode_damps.size(); ++d) {
        const auto& idx = damp_indices[d];
        const double w = 2.0 * mode_damps[d].rate;
        const int offset = 1 << mode_damps[d].bit;
        for (int ci : idx) {
            const int cc = ci - offset;
            for (int ri : idx) out(ri - offset, cc) += w * rho(ri, ci);
        }
    }
    for (const auto& j : generic_jumps) {
        scratch.noalias() = j.op * rho;
        out.noalias() += 2.0 * j.rate * (scratch * j.op.adjoint());
    }
}

Eigen::MatrixXcd GeneratorSet::apply(const Eigen::MatrixXcd& rho) const {
    Eigen::MatrixXcd out(dim, dim), scratch(dim, dim);
    apply_into(rho, out, scratch);
    return out;
}

double GeneratorSet::electronic_population(const Eigen::MatrixXcd& rho,
                                           int el) const {
    const int mdim = mode_dim();
    double p = 0.0;
    for (int mm = 0; mm < mdim; ++mm) p += rho(el * mdim + mm, el * mdim + mm).real();
    return p;
}

Complex GeneratorSet::electronic_coherence(const Eigen::MatrixXcd& rho,
                                           int el_a, int el_b) const {
    const int mdim = mode_dim();
    Complex c = 0.0;
    for (int mm = 0; mm < mdim; ++mm) c += rho(el_a * mdim + mm, el_b * mdim + mm);
    return c;
}

double GeneratorSet::mode_occupation(const Eigen::MatrixXcd& rho,
                                     int bit) const {
    const int mdim = mode_dim();
    double p = 0.0;
    for (int i = 0; i < dim; ++i)
        if ((i % mdim) & (1 << bit)) p += rho(i, i).real();
    return p;
}

}  // namespace qnet
