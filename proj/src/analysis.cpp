#include "qnet/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "qnet/errors.hpp"
#include "qnet/generators.hpp"

namespace qnet {

using nlohmann::json;

namespace {

constexpr double kClosureResidual = 1e-9;

/// Smallest H-invariant subspace containing |k>, as orthonormal columns.
Eigen::MatrixXcd krylov_closure(const Eigen::MatrixXcd& h, int k) {
    const int n = static_cast<int>(h.rows());
    std::vector<Eigen::VectorXcd> basis;
    Eigen::VectorXcd seed = Eigen::VectorXcd::Zero(n);
    seed[k - 1] = 1.0;
    basis.push_back(seed);
    for (std::size_t i = 0; i < basis.size() && static_cast<int>(basis.size()) < n;
         ++i) {
        Eigen::VectorXcd w = h * basis[i];
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& v : basis) w -= v.dot(w) * v;
        if (w.norm() > kClosureResidual) basis.push_back(w.normalized());
    }
    Eigen::MatrixXcd c(n, basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) c.col(i) = basis[i];
    return c;
}

}  // namespace

InvariantSubspace invariant_subspace(const Eigen::MatrixXcd& h_sites, int k) {
    const int n = static_cast<int>(h_sites.rows());
    if (h_sites.cols() != n) throw DimensionMismatch("Hamiltonian not square");
    if ((h_sites - h_sites.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw ValidationError("Hamiltonian is not Hermitian");
    if (k < 1 || k > n) throw ValidationError("sink site out of range");

    const Eigen::MatrixXcd closure = krylov_closure(h_sites, k);
    const int d = static_cast<int>(closure.cols());

    InvariantSubspace out;
    out.sink_coupled_site = k;
    out.dimension = n - d;
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(closure);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
    out.basis = q.rightCols(n - d);

    // Postconditions: complement orthogonal to |k> and H-invariant.
    for (int i = 0; i < out.dimension; ++i) {
        if (std::abs(out.basis(k - 1, i)) > 1e-10)
            throw NumericalInstability("complement overlaps the sink site");
        Eigen::VectorXcd hv = h_sites * out.basis.col(i);
        Eigen::VectorXcd residual = hv - out.basis * (out.basis.adjoint() * hv);
        if (residual.norm() > 1e-9)
            throw NumericalInstability("complement is not H-invariant");
    }

    Eigen::MatrixXcd h_closure = closure.adjoint() * h_sites * closure;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h_closure,
                                                       Eigen::EigenvaluesOnly);
    for (int i = 0; i + 1 < d; ++i)
        if (es.eigenvalues()[i + 1] - es.eigenvalues()[i] < 1e-9)
            out.degenerate_spectrum = true;
    return out;
}

double asymptotic_sink(const Eigen::VectorXcd& psi0,
                       const Eigen::MatrixXcd& h_sites, int k) {
    if (psi0.size() != h_sites.rows())
        throw DimensionMismatch("initial state does not match Hamiltonian");
    if (std::abs(psi0.norm() - 1.0) > 1e-10)
        throw ValidationError("initial state is not normalized");
    const InvariantSubspace inv = invariant_subspace(h_sites, k);
    return 1.0 - (inv.basis.adjoint() * psi0).squaredNorm();
}

double transfer_rate(const Trajectory& traj, double t_a, double t_b) {
    if (traj.times.empty()) throw ValidationError("empty trajectory");
    if (!(t_a < t_b)) throw ValidationError("window must satisfy t_a < t_b");
    if (t_a < traj.times.front() - 1e-12 || t_b > traj.times.back() + 1e-12)
        throw ValidationError("window outside trajectory range");
    return (traj.sink_at(t_b) - traj.sink_at(t_a)) / (t_b - t_a);
}

namespace {

NetworkHamiltonian network_from_matrix(const Eigen::MatrixXcd& h,
                                       UnitSystem units) {
    if (h.imag().cwiseAbs().maxCoeff() > 1e-12)
        throw ValidationError("pathway surgery produced a complex matrix");
    NetworkHamiltonian n;
    n.n_sites = static_cast<int>(h.rows());
    n.energies = h.real().diagonal();
    n.couplings = h.real();
    n.couplings.diagonal().setZero();
    n.units = units;
    return n;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double na = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= na;
    mb /= na;
    double cov = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    return cov / std::sqrt(va * vb);
}

}  // namespace

PathwayReport pathway_report(const FmoSystem& sys, const PathwayOptions& opts) {
    sys.validate();
    const int n = sys.hamiltonian.n_sites;
    const BasisTransform u = hybrid_transform(1, 2, n);
    const Eigen::MatrixXcd h_site = sys.hamiltonian.site_matrix();
    const Eigen::MatrixXcd h_hybrid = transform_hamiltonian(h_site, u);

    PathwayReport rep;
    rep.isolation_window[0] = opts.isolation_window[0];
    rep.isolation_window[1] = opts.isolation_window[1];
    rep.comparison_window[0] = opts.comparison_window[0];
    rep.comparison_window[1] = opts.comparison_window[1];

    IntegratorConfig cfg = opts.integrator;
    if (cfg.t_final <= 0.0)
        cfg.t_final = std::max(opts.isolation_window[1],
                               opts.comparison_window[1]);

    auto run = [&](const Eigen::MatrixXcd& h, const Eigen::VectorXcd& psi) {
        NoiseSpec noise;
        noise.dissipation =
            DissipationSpec::sink_only(n, sys.sink_site, sys.sink_rate);
        GeneratorSet gens =
            build_generators(network_from_matrix(h, sys.hamiltonian.units),
                             noise);
        return evolve(pure_site_state(psi), gens, cfg);
    };

    double residual = 0.0;
    auto check_hermitian = [&](const Eigen::MatrixXcd& h) {
        residual = std::max(residual,
                            (h - h.adjoint()).cwiseAbs().maxCoeff());
        return h;
    };

    // In the hybrid basis index 1 is |+>, index 2 is |->; the source site 1
    // maps to (|+> + |->)/sqrt(2).
    Eigen::VectorXcd source = Eigen::VectorXcd::Zero(n);
    source[sys.source_site - 1] = 1.0;
    const Eigen::VectorXcd source_hybrid = u.unitary * source;
    Eigen::VectorXcd plus = Eigen::VectorXcd::Unit(n, 0);
    Eigen::VectorXcd minus = Eigen::VectorXcd::Unit(n, 1);

    const Trajectory baseline = run(check_hermitian(h_hybrid), source_hybrid);
    rep.baseline_rate = transfer_rate(baseline, opts.comparison_window[0],
                                      opts.comparison_window[1]);

    // Path isolation: keep a single coupling, zero everything else.
    auto isolate = [&](int a, int b) {
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
        h.diagonal() = h_hybrid.diagonal();
        h(a - 1, b - 1) = h_hybrid(a - 1, b - 1);
        h(b - 1, a - 1) = h_hybrid(b - 1, a - 1);
        return h;
    };
    // An isolated channel drains exponentially, so its transfer rate is the
    // decay constant of the untransferred population over the window.
    auto decay_rate = [&](const Trajectory& t) {
        const double a = t.sink_at(opts.isolation_window[0]);
        const double b = t.sink_at(opts.isolation_window[1]);
        return std::log((1.0 - a) / (1.0 - b)) /
               (opts.isolation_window[1] - opts.isolation_window[0]);
    };
    const Trajectory t1 = run(check_hermitian(isolate(1, sys.sink_site)), plus);
    rep.path1_rate = decay_rate(t1);
    rep.surgeries.push_back("path I: all couplings zeroed except |+> <-> |3>");
    const Trajectory t2 = run(check_hermitian(isolate(2, sys.sink_site)), minus);
    rep.path2_rate = decay_rate(t2);
    rep.surgeries.push_back("path II: all couplings zeroed except |-> <-> |3>");

    const Eigen::MatrixXcd h_no_m6 = edit_coupling(h_hybrid, 2, 6, 0.0);
    const Trajectory t3 = run(check_hermitian(h_no_m6), source_hybrid);
    rep.minus6_zeroed_rate = transfer_rate(t3, opts.comparison_window[0],
                                           opts.comparison_window[1]);
    rep.surgeries.push_back("|-> <-> |6> coupling zeroed, full H otherwise");

    rep.path2_over_path1 = rep.path2_rate / rep.path1_rate;
    rep.minus6_speedup = rep.minus6_zeroed_rate / rep.baseline_rate;
    rep.surgery_hermiticity_residual = residual;

    // |-> population is the site-2 population of the hybrid-basis run.
    std::vector<double> p_minus, p57;
    for (const auto& pops : baseline.site_populations) {
        p_minus.push_back(pops[1]);
        double s = 0.0;
        for (int j = 5; j <= std::min(7, n); ++j) s += pops[j - 1];
        p57.push_back(s);
    }
    rep.minus_vs_57_correlation = pearson(p_minus, p57);
    return rep;
}

void PathwayReport::to_json(const std::string& path) const {
    json j;
    j["baseline_rate"] = baseline_rate;
    j["path1_rate"] = path1_rate;
    j["path2_rate"] = path2_rate;
    j["minus6_zeroed_rate"] = minus6_zeroed_rate;
    j["window"] = {{"isolation", {isolation_window[0], isolation_window[1]}},
                   {"comparison", {comparison_window[0], comparison_window[1]}}};
    j["ratios"] = {{"path2_over_path1", path2_over_path1},
                   {"minus6_speedup", minus6_speedup}};
    j["minus_vs_57_correlation"] = minus_vs_57_correlation;
    j["surgery_hermiticity_residual"] = surgery_hermiticity_residual;
    j["surgeries"] = surgeries;
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open file for writing: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace qnet
