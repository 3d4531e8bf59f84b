#include "qnet/propagate.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "qnet/errors.hpp"

namespace qnet {

using nlohmann::json;

void DensityMatrix::validate() const {
    if (rho.rows() != rho.cols()) throw ValidationError("state is not square");
    const int expected = (n_sites + 2) << n_modes;
    if (dim() != expected)
        throw DimensionMismatch("state dimension does not match descriptor");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw ValidationError("state is not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > 1e-9 ||
        std::abs(rho.trace().imag()) > 1e-9)
        throw ValidationError("state trace is not 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho,
                                                       Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-7)
        throw ValidationError("state has a negative eigenvalue");
}

DensityMatrix site_excitation(int n_sites, int site, int n_modes) {
    if (site < 1 || site > n_sites)
        throw ValidationError("excitation site out of range");
    DensityMatrix d;
    d.n_sites = n_sites;
    d.n_modes = n_modes;
    const int dim = (n_sites + 2) << n_modes;
    d.rho = Eigen::MatrixXcd::Zero(dim, dim);
    d.rho(site << n_modes, site << n_modes) = 1.0;
    return d;
}

DensityMatrix pure_site_state(const Eigen::VectorXcd& amplitudes, int n_modes) {
    const int n = static_cast<int>(amplitudes.size());
    if (n < 1) throw ValidationError("empty amplitude vector");
    if (std::abs(amplitudes.norm() - 1.0) > 1e-10)
        throw ValidationError("amplitude vector is not normalized");
    DensityMatrix d;
    d.n_sites = n;
    d.n_modes = n_modes;
    const int mdim = 1 << n_modes;
    const int dim = (n + 2) * mdim;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    for (int j = 1; j <= n; ++j) psi[j * mdim] = amplitudes[j - 1];
    d.rho = psi * psi.adjoint();
    return d;
}

void IntegratorConfig::validate() const {
    if (dt < 0.0) throw ValidationError("dt must be non-negative");
    if (t_final <= 0.0) throw ValidationError("t_final must be positive");
    if (record_stride < 1) throw ValidationError("record_stride must be >= 1");
    if (tolerance <= 0.0) throw ValidationError("tolerance must be positive");
}

double Trajectory::sink_at(double t) const {
    if (times.empty()) throw ValidationError("empty trajectory");
    if (t <= times.front()) return sink_population.front();
    if (t >= times.back()) return sink_population.back();
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times.begin());
    const double t0 = times[i - 1], t1 = times[i];
    const double w = (t - t0) / (t1 - t0);
    return (1.0 - w) * sink_population[i - 1] + w * sink_population[i];
}

double Trajectory::coherence_lifetime(double threshold) const {
    double last = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
        if (std::abs(coherence[i]) >= threshold) last = times[i];
    return last;
}

Eigen::MatrixXcd rhs(const Eigen::MatrixXcd& rho, const GeneratorSet& gens) {
    return gens.apply(rho);
}

namespace {

struct RunResult {
    Trajectory traj;
    double final_sink = 0.0;
};

RunResult run_fixed(const DensityMatrix& rho0, const GeneratorSet& gens,
                    const IntegratorConfig& cfg, double dt, bool record_full,
                    bool strict = true) {
    const long nsteps = std::max(1L, std::lround(cfg.t_final / dt));
    const double h = cfg.t_final / static_cast<double>(nsteps);
    const int dim = gens.dim;
    const int n = gens.n_sites;
    const int n_modes = gens.modes ? gens.modes->n_modes : 0;

    long pos_stride = cfg.positivity_check_stride;
    if (pos_stride <= 0) pos_stride = std::max(1L, nsteps / 5);

    Eigen::MatrixXcd rho = rho0.rho;
    Eigen::MatrixXcd ka(dim, dim), kb(dim, dim), stage(dim, dim),
        acc(dim, dim), scratch(dim, dim);

    RunResult res;
    Trajectory& tr = res.traj;
    tr.coherence_pair = cfg.coherence_pair;
    tr.has_hybrid = cfg.hybrid_pair.has_value();
    tr.mode_excitation_max = Eigen::VectorXd::Zero(n_modes);

    double sink_integral = 0.0;
    double prev_kk =
        gens.sink_site > 0 ? gens.electronic_population(rho, gens.sink_site)
                           : 0.0;

    auto record = [&](double t) {
        if (!record_full) return;
        tr.times.push_back(t);
        Eigen::VectorXd pops(n);
        for (int j = 1; j <= n; ++j)
            pops[j - 1] = gens.electronic_population(rho, j);
        tr.site_populations.push_back(pops);
        tr.ground_population.push_back(gens.electronic_population(rho, 0));
        tr.sink_population.push_back(gens.electronic_population(rho, n + 1));
        tr.sink_population_integral.push_back(sink_integral);
        tr.coherence.push_back(gens.electronic_coherence(
            rho, cfg.coherence_pair.first, cfg.coherence_pair.second));
        if (cfg.hybrid_pair) {
            const auto [i, j] = *cfg.hybrid_pair;
            const double mean = 0.5 * (pops[i - 1] + pops[j - 1]);
            const double re = gens.electronic_coherence(rho, i, j).real();
            tr.p_plus.push_back(mean + re);
            tr.p_minus.push_back(mean - re);
        }
        // Loose sanity at every recorded sample.
        const double tracedev = std::abs(rho.trace().real() - 1.0) +
                                std::abs(rho.trace().imag());
        if (tracedev > 1e-8)
            throw NumericalInstability(
                "trace drift exceeds 1e-8; reduce the time step");
        if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
            throw NumericalInstability(
                "Hermiticity drift exceeds 1e-9; reduce the time step");
    };

    record(0.0);
    for (long step = 0; step < nsteps; ++step) {
        gens.apply_into(rho, ka, scratch);
        acc = ka;
        stage = rho + (0.5 * h) * ka;
        gens.apply_into(stage, kb, scratch);
        acc += 2.0 * kb;
        stage = rho + (0.5 * h) * kb;
        gens.apply_into(stage, ka, scratch);
        acc += 2.0 * ka;
        stage = rho + h * ka;
        gens.apply_into(stage, kb, scratch);
        acc += kb;
        rho += (h / 6.0) * acc;

        if (gens.sink_site > 0) {
            // Trapezoid on the integrator grid keeps the dual accounting tight.
            const double kk = gens.electronic_population(rho, gens.sink_site);
            sink_integral += 2.0 * gens.sink_rate * h * 0.5 * (prev_kk + kk);
            prev_kk = kk;
        }
        for (int b = 0; b < n_modes; ++b) {
            const double occ = gens.mode_occupation(rho, b);
            if (occ > tr.mode_excitation_max[b]) tr.mode_excitation_max[b] = occ;
        }
        if (strict && ((step + 1) % pos_stride == 0 || step + 1 == nsteps)) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
                rho, Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() < -1e-7)
                throw NumericalInstability(
                    "positivity violation; reduce the time step");
        }
        if ((step + 1) % cfg.record_stride == 0 || step + 1 == nsteps)
            record(static_cast<double>(step + 1) * h);
    }
    res.final_sink = gens.electronic_population(rho, n + 1);
    return res;
}

}  // namespace

Trajectory evolve(const DensityMatrix& rho0, const GeneratorSet& gens,
                  const IntegratorConfig& config) {
    config.validate();
    rho0.validate();
    if (rho0.dim() != gens.dim)
        throw DimensionMismatch("initial state does not match generators");

    IntegratorConfig cfg = config;
    if (cfg.dt == 0.0) {
        const double base = gens.units.kind == UnitKind::Spectroscopic
                                ? kDefaultDtSpectroscopic
                                : kDefaultDtDimensionless;
        // Crude generator norm bound so strongly dissipative runs (large
        // dephasing rates) stay inside the RK4 stability region.
        double stiffness = gens.elementwise.cwiseAbs().maxCoeff();
        Eigen::VectorXd colsum = Eigen::VectorXd::Zero(gens.dim);
        for (int k = 0; k < gens.drift_offdiag.outerSize(); ++k)
            for (SparseCd::InnerIterator it(gens.drift_offdiag, k); it; ++it)
                colsum[it.col()] += std::abs(it.value());
        stiffness += 2.0 * colsum.maxCoeff();
        cfg.dt = std::min(base, 1.0 / std::max(stiffness, 1e-12));
    }

    if (!cfg.check_convergence)
        return std::move(run_fixed(rho0, gens, cfg, cfg.dt, true).traj);

    // Coarse pass only feeds the convergence guard; the halved-step run is
    // the one recorded and checked, so the delivered trajectory is the more
    // accurate of the two.
    RunResult coarse = run_fixed(rho0, gens, cfg, cfg.dt, false, false);
    IntegratorConfig fine_cfg = cfg;
    fine_cfg.record_stride = cfg.record_stride * 2;
    if (cfg.positivity_check_stride > 0)
        fine_cfg.positivity_check_stride = cfg.positivity_check_stride * 2;
    RunResult fine = run_fixed(rho0, gens, fine_cfg, cfg.dt / 2.0, true);
    if (std::abs(coarse.final_sink - fine.final_sink) >= cfg.tolerance)
        throw StepTooLarge(
            "p_sink(t_final) moved by " +
            std::to_string(std::abs(coarse.final_sink - fine.final_sink)) +
            " under step halving; reduce dt");
    return std::move(fine.traj);
}

std::vector<std::pair<double, double>> sink_population_dual(
    const Trajectory& traj) {
    std::vector<std::pair<double, double>> out;
    out.reserve(traj.times.size());
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        out.emplace_back(traj.sink_population[i],
                         traj.sink_population_integral[i]);
    return out;
}

DensityMatrix reduced_electronic_state(const DensityMatrix& extended) {
    if (extended.n_modes == 0)
        throw BasisError("state has no mode factors to trace out");
    const int mdim = 1 << extended.n_modes;
    const int dim_el = extended.n_sites + 2;
    DensityMatrix red;
    red.n_sites = extended.n_sites;
    red.n_modes = 0;
    red.rho = Eigen::MatrixXcd::Zero(dim_el, dim_el);
    for (int a = 0; a < dim_el; ++a)
        for (int b = 0; b < dim_el; ++b)
            for (int mm = 0; mm < mdim; ++mm)
                red.rho(a, b) += extended.rho(a * mdim + mm, b * mdim + mm);
    return red;
}

namespace {

std::string fmt12(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

void Trajectory::to_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open file for writing: " + path);
    const int n = times.empty() ? 0 : static_cast<int>(site_populations[0].size());
    out << "t,p0";
    for (int j = 1; j <= n; ++j) out << ",p" << j;
    out << ",p_sink,p_sink_integral,re_c12,im_c12";
    if (has_hybrid) out << ",p_plus,p_minus";
    out << "\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        out << fmt12(times[i]) << ',' << fmt12(ground_population[i]);
        for (int j = 0; j < n; ++j) out << ',' << fmt12(site_populations[i][j]);
        out << ',' << fmt12(sink_population[i]) << ','
            << fmt12(sink_population_integral[i]) << ','
            << fmt12(coherence[i].real()) << ',' << fmt12(coherence[i].imag());
        if (has_hybrid) out << ',' << fmt12(p_plus[i]) << ',' << fmt12(p_minus[i]);
        out << "\n";
    }
}

void Trajectory::to_json(const std::string& path) const {
    json j;
    j["t"] = times;
    j["p0"] = ground_population;
    const int n = times.empty() ? 0 : static_cast<int>(site_populations[0].size());
    for (int s = 1; s <= n; ++s) {
        std::vector<double> col;
        col.reserve(times.size());
        for (const auto& pops : site_populations) col.push_back(pops[s - 1]);
        j["p" + std::to_string(s)] = col;
    }
    j["p_sink"] = sink_population;
    j["p_sink_integral"] = sink_population_integral;
    std::vector<double> re, im;
    for (const auto& c : coherence) {
        re.push_back(c.real());
        im.push_back(c.imag());
    }
    j["re_c12"] = re;
    j["im_c12"] = im;
    if (has_hybrid) {
        j["p_plus"] = p_plus;
        j["p_minus"] = p_minus;
    }
    if (mode_excitation_max.size() > 0)
        j["mode_excitation_max"] = std::vector<double>(
            mode_excitation_max.data(),
            mode_excitation_max.data() + mode_excitation_max.size());
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open file for writing: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace qnet
