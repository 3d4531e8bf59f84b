#include "qnet/noise.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "qnet/errors.hpp"

namespace qnet {

DephasingSpec DephasingSpec::local(const Eigen::VectorXd& rates) {
    DephasingSpec s;
    s.mode = Mode::Local;
    s.local_rates = rates;
    s.validate();
    return s;
}

DephasingSpec DephasingSpec::uniform(int n, double rate) {
    return local(Eigen::VectorXd::Constant(n, rate));
}

DephasingSpec DephasingSpec::correlated(const Eigen::MatrixXd& gamma) {
    DephasingSpec s;
    s.mode = Mode::Correlated;
    s.correlated_matrix = gamma;
    s.validate();
    return s;
}

int DephasingSpec::n_sites() const {
    return mode == Mode::Local ? static_cast<int>(local_rates.size())
                               : static_cast<int>(correlated_matrix.rows());
}

void DephasingSpec::validate() const {
    if (mode == Mode::Local) {
        if (local_rates.size() == 0)
            throw ValidationError("dephasing rates vector is empty");
        if (local_rates.minCoeff() < 0.0)
            throw ValidationError("negative dephasing rate");
        return;
    }
    const auto& g = correlated_matrix;
    if (g.rows() == 0 || g.rows() != g.cols())
        throw ValidationError("correlated dephasing matrix is not square");
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw ValidationError("correlated dephasing matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g,
                                                      Eigen::EigenvaluesOnly);
    // Floor tolerates round-off from optimizer-produced Cholesky factors.
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw ValidationError(
            "correlated dephasing matrix is not positive semidefinite");
}

DissipationSpec DissipationSpec::sink_only(int n, int site, double rate) {
    DissipationSpec s;
    s.radiative_rates = Eigen::VectorXd::Zero(n);
    s.sink_site = site;
    s.sink_rate = rate;
    s.validate();
    return s;
}

void DissipationSpec::validate() const {
    if (radiative_rates.size() == 0)
        throw ValidationError("radiative rates vector is empty");
    if (radiative_rates.minCoeff() < 0.0)
        throw ValidationError("negative radiative rate");
    const int n = static_cast<int>(radiative_rates.size());
    if (sink_site != 0 && (sink_site < 1 || sink_site > n))
        throw ValidationError("sink site out of range");
    if (sink_site != 0 && sink_rate <= 0.0)
        throw ValidationError("sink rate must be positive");
}

double LocalModeSpec::coupling() const {
    return std::sqrt(huang_rhys) * mode_frequency;
}

void LocalModeSpec::validate(int n_sites) const {
    if (mode_frequency <= 0.0) throw ValidationError("mode frequency <= 0");
    if (huang_rhys < 0.0) throw ValidationError("Huang-Rhys factor < 0");
    if (mode_damping < 0.0) throw ValidationError("mode damping < 0");
    if (attached_sites.empty())
        throw ValidationError("local-mode spec has no attached sites");
    for (int s : attached_sites)
        if (s < 1 || s > n_sites)
            throw ValidationError("attached mode site out of range");
}

namespace {

int check_electronic_dim(const Eigen::MatrixXcd& rho, int n_sites) {
    const int dim = n_sites + 2;
    if (rho.rows() != dim || rho.cols() != dim)
        throw DimensionMismatch("density matrix does not match N+2 space");
    return dim;
}

}  // namespace

Eigen::MatrixXcd apply_local_dephasing(const Eigen::MatrixXcd& rho,
                                       const DephasingSpec& spec) {
    if (spec.mode != DephasingSpec::Mode::Local)
        throw ValidationError("spec is not in local mode");
    const int n = spec.n_sites();
    const int dim = check_electronic_dim(rho, n);
    // gamma_j [ -{n_j, rho} + 2 n_j rho n_j ] with n_j = |j><j|: elementwise
    // decay of coherences involving site j, populations untouched.
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
            double w = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double dr = (r == j) ? 1.0 : 0.0;
                const double dc = (c == j) ? 1.0 : 0.0;
                w += spec.local_rates[j - 1] * (dr - dc) * (dr - dc);
            }
            out(r, c) = -w * rho(r, c);
        }
    }
    return out;
}

Eigen::MatrixXcd apply_correlated_dephasing(const Eigen::MatrixXcd& rho,
                                            const Eigen::MatrixXd& gamma) {
    DephasingSpec::correlated(gamma);  // PSD + symmetry check
    const int n = static_cast<int>(gamma.rows());
    const int dim = check_electronic_dim(rho, n);
    std::vector<Eigen::MatrixXcd> a(n);
    for (int m = 0; m < n; ++m) {
        a[m] = Eigen::MatrixXcd::Zero(dim, dim);
        a[m](m + 1, m + 1) = 1.0;
    }
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    for (int m = 0; m < n; ++m) {
        for (int k = 0; k < n; ++k) {
            const Eigen::MatrixXcd inner = a[k] * rho - rho * a[k];
            out -= gamma(m, k) * (a[m] * inner - inner * a[m]);
        }
    }
    return out;
}

Eigen::MatrixXcd apply_radiative(const Eigen::MatrixXcd& rho,
                                 const DissipationSpec& spec) {
    const int n = static_cast<int>(spec.radiative_rates.size());
    const int dim = check_electronic_dim(rho, n);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    for (int j = 1; j <= n; ++j) {
        const double g = spec.radiative_rates[j - 1];
        if (g == 0.0) continue;
        // -{n_j, rho}
        out.row(j) -= g * rho.row(j);
        out.col(j) -= g * rho.col(j);
        // +2 sigma_j^- rho sigma_j^+
        out(0, 0) += 2.0 * g * rho(j, j);
    }
    return out;
}

Eigen::MatrixXcd apply_sink(const Eigen::MatrixXcd& rho,
                            const DissipationSpec& spec) {
    const int n = static_cast<int>(spec.radiative_rates.size());
    const int dim = check_electronic_dim(rho, n);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    if (spec.sink_site == 0) return out;
    const int k = spec.sink_site;
    const int sink = n + 1;
    const double g = spec.sink_rate;
    out.row(k) -= g * rho.row(k);
    out.col(k) -= g * rho.col(k);
    out(sink, sink) += 2.0 * g * rho(k, k);
    return out;
}

}  // namespace qnet
