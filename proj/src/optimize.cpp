#include "qnet/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "json.hpp"
#include "qnet/errors.hpp"

namespace qnet {

using nlohmann::json;

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<double> clamp_point(std::vector<double> x,
                                const std::vector<double>& lo,
                                const std::vector<double>& hi) {
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::clamp(x[i], lo[i], hi[i]);
    return x;
}

}  // namespace

SimplexTrace nelder_mead_maximize(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, const std::vector<double>& lower,
    const std::vector<double>& upper, const SimplexOptions& opts) {
    const int n = static_cast<int>(x0.size());
    SimplexTrace trace;
    trace.best_f = -std::numeric_limits<double>::infinity();

    auto eval = [&](const std::vector<double>& raw) {
        const std::vector<double> x = clamp_point(raw, lower, upper);
        const double v = f(x);
        ++trace.evals;
        if (v > trace.best_f) {
            trace.best_f = v;
            trace.best_x = x;
            trace.best_so_far.emplace_back(trace.evals, v);
        }
        return v;
    };

    std::vector<std::vector<double>> x(n + 1, clamp_point(x0, lower, upper));
    for (int i = 0; i < n; ++i) {
        double step = opts.initial_step;
        if (x[i + 1][i] + step > upper[i]) step = -step;
        x[i + 1][i] += step;
    }
    std::vector<double> fx(n + 1);
    for (int i = 0; i <= n; ++i) fx[i] = eval(x[i]);

    while (trace.evals < opts.max_evals) {
        // Order best-to-worst (maximizing).
        std::vector<int> idx(n + 1);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](int a, int b) { return fx[a] > fx[b]; });
        std::vector<std::vector<double>> xs(n + 1);
        std::vector<double> fs(n + 1);
        for (int i = 0; i <= n; ++i) {
            xs[i] = x[idx[i]];
            fs[i] = fx[idx[i]];
        }
        x.swap(xs);
        fx.swap(fs);
        if (std::abs(fx[0] - fx[n]) < opts.f_tolerance) break;

        std::vector<double> centroid(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int d = 0; d < n; ++d) centroid[d] += x[i][d] / n;

        auto along = [&](double coeff) {
            std::vector<double> p(n);
            for (int d = 0; d < n; ++d)
                p[d] = centroid[d] + coeff * (centroid[d] - x[n][d]);
            return p;
        };

        const std::vector<double> xr = along(1.0);
        const double fr = eval(xr);
        if (fr > fx[0]) {
            const std::vector<double> xe = along(2.0);
            const double fe = eval(xe);
            if (fe > fr) {
                x[n] = xe;
                fx[n] = fe;
            } else {
                x[n] = xr;
                fx[n] = fr;
            }
        } else if (fr > fx[n - 1]) {
            x[n] = xr;
            fx[n] = fr;
        } else {
            const std::vector<double> xc = along(fr > fx[n] ? 0.5 : -0.5);
            const double fc = eval(xc);
            if (fc > std::max(fr, fx[n])) {
                x[n] = xc;
                fx[n] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    for (int d = 0; d < n; ++d)
                        x[i][d] = x[0][d] + 0.5 * (x[i][d] - x[0][d]);
                    fx[i] = eval(x[i]);
                    if (trace.evals >= opts.max_evals) break;
                }
            }
        }
    }
    return trace;
}

std::vector<int> OptimizationProblem::effective_sites() const {
    if (!site_subset.empty()) return site_subset;
    std::vector<int> all(network.n_sites);
    std::iota(all.begin(), all.end(), 1);
    return all;
}

namespace {

DephasingSpec spec_from_parameters(const OptimizationProblem& p,
                                   const std::vector<double>& params) {
    const int n = p.network.n_sites;
    if (p.free_parameters == OptimizationProblem::Free::LocalRates) {
        const auto sites = p.effective_sites();
        Eigen::VectorXd rates = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i < sites.size(); ++i)
            rates[sites[i] - 1] = std::pow(10.0, params[i]);
        return DephasingSpec::local(rates);
    }
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    std::size_t idx = 0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c <= r; ++c) l(r, c) = params[idx++];
    return DephasingSpec::correlated(l * l.transpose());
}

std::size_t parameter_count(const OptimizationProblem& p) {
    return p.free_parameters == OptimizationProblem::Free::LocalRates
               ? p.effective_sites().size()
               : static_cast<std::size_t>(p.network.n_sites) *
                     (p.network.n_sites + 1) / 2;
}

void parameter_bounds(const OptimizationProblem& p, std::vector<double>& lo,
                      std::vector<double>& hi) {
    const std::size_t np = parameter_count(p);
    if (p.free_parameters == OptimizationProblem::Free::LocalRates) {
        lo.assign(np, p.log10_bounds.first);
        hi.assign(np, p.log10_bounds.second);
    } else {
        // Cholesky-factor entries; a single entry of magnitude b yields a
        // diagonal rate of b^2 = 10^upper.
        const double b = std::pow(10.0, p.log10_bounds.second / 2.0);
        lo.assign(np, -b);
        hi.assign(np, b);
    }
}

IntegratorConfig objective_integrator(const OptimizationProblem& p) {
    IntegratorConfig cfg = p.integrator;
    cfg.t_final = p.target_time;
    cfg.hybrid_pair.reset();
    return cfg;
}

OptimizationResult run_multistart(const OptimizationProblem& p) {
    if (p.target_time <= 0.0) throw ValidationError("target_time must be > 0");
    if (!(p.log10_bounds.first < p.log10_bounds.second))
        throw ValidationError("invalid rate bounds");
    p.network.validate();
    const std::size_t np = parameter_count(p);
    std::vector<double> lo, hi;
    parameter_bounds(p, lo, hi);

    // Search evaluations skip the step-halving guard (3x cheaper); the
    // winning point is re-scored with the guard on below.
    OptimizationProblem search = p;
    search.integrator.check_convergence = false;
    const auto objective = [&](const std::vector<double>& params) {
        try {
            return dephasing_objective(search, spec_from_parameters(p, params));
        } catch (const Error&) {
            // Failed evaluations are scored out of the running, never fatal.
            return -std::numeric_limits<double>::infinity();
        }
    };

    // Latin-hypercube start points, one stratum per restart and dimension.
    const int r_total = std::max(1, p.restarts);
    std::vector<std::vector<double>> starts(r_total,
                                            std::vector<double>(np, 0.0));
    std::mt19937_64 rng(p.seed);
    for (std::size_t d = 0; d < np; ++d) {
        std::vector<int> perm(r_total);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = r_total - 1; i > 0; --i)
            std::swap(perm[i], perm[rng() % static_cast<std::uint64_t>(i + 1)]);
        for (int r = 0; r < r_total; ++r) {
            const double u = uniform01(rng);
            starts[r][d] =
                lo[d] + (perm[r] + u) / r_total * (hi[d] - lo[d]);
        }
    }
    if (!p.initial_guess.empty()) {
        if (p.initial_guess.size() != np)
            throw ValidationError("initial_guess has wrong length");
        starts[0] = p.initial_guess;
    }

    OptimizationResult res;
    res.seed = p.seed;
    res.best_objective = -std::numeric_limits<double>::infinity();
    SimplexOptions sopts;
    sopts.max_evals = p.max_evals;
    for (int r = 0; r < r_total; ++r) {
        RestartTrace rt;
        rt.start = starts[r];
        rt.trace = nelder_mead_maximize(objective, starts[r], lo, hi, sopts);
        res.total_evaluations += rt.trace.evals;
        // Ties broken by lowest restart index.
        if (rt.trace.best_f > res.best_objective) {
            res.best_objective = rt.trace.best_f;
            res.best_parameters = rt.trace.best_x;
            res.best_restart = r;
        }
        res.restarts.push_back(std::move(rt));
    }
    // Verified objective: the winner re-evaluated under the caller's guard.
    res.best_objective =
        dephasing_objective(p, spec_from_parameters(p, res.best_parameters));
    return res;
}

}  // namespace

double dephasing_objective(const OptimizationProblem& p,
                           const DephasingSpec& spec) {
    NoiseSpec noise;
    noise.dephasing = spec;
    noise.dissipation = p.dissipation;
    const GeneratorSet gens = build_generators(p.network, noise);
    const Trajectory traj = evolve(site_excitation(p.network.n_sites, 1),
                                   gens, objective_integrator(p));
    return traj.final_sink();
}

OptimizationResult optimize_local(const OptimizationProblem& p) {
    if (p.free_parameters != OptimizationProblem::Free::LocalRates)
        throw ValidationError("problem is not a local-rates problem");
    return run_multistart(p);
}

OptimizationResult optimize_correlated(const OptimizationProblem& p) {
    if (p.free_parameters != OptimizationProblem::Free::CorrelatedMatrix)
        throw ValidationError("problem is not a correlated-matrix problem");
    return run_multistart(p);
}

Eigen::VectorXd OptimizationResult::local_rates(
    const OptimizationProblem& p) const {
    Eigen::VectorXd rates = Eigen::VectorXd::Zero(p.network.n_sites);
    const auto sites = p.effective_sites();
    for (std::size_t i = 0; i < sites.size(); ++i)
        rates[sites[i] - 1] = std::pow(10.0, best_parameters[i]);
    return rates;
}

Eigen::MatrixXd OptimizationResult::correlated_matrix(
    const OptimizationProblem& p) const {
    const int n = p.network.n_sites;
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    std::size_t idx = 0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c <= r; ++c) l(r, c) = best_parameters[idx++];
    return l * l.transpose();
}

std::vector<std::pair<double, double>> dephasing_sweep(
    const NetworkHamiltonian& h, const DissipationSpec& dissipation,
    const std::vector<double>& gamma_grid, double t_fixed,
    const IntegratorConfig& integrator) {
    if (gamma_grid.empty()) throw ValidationError("empty sweep grid");
    for (std::size_t i = 1; i < gamma_grid.size(); ++i)
        if (gamma_grid[i] < gamma_grid[i - 1])
            throw ValidationError("sweep grid must be ascending");
    h.validate();
    std::vector<std::pair<double, double>> out;
    out.reserve(gamma_grid.size());
    IntegratorConfig cfg = integrator;
    cfg.t_final = t_fixed;
    for (double gamma : gamma_grid) {
        NoiseSpec noise;
        if (gamma > 0.0)
            noise.dephasing = DephasingSpec::uniform(h.n_sites, gamma);
        noise.dissipation = dissipation;
        const GeneratorSet gens = build_generators(h, noise);
        const Trajectory traj =
            evolve(site_excitation(h.n_sites, 1), gens, cfg);
        out.emplace_back(gamma, traj.final_sink());
    }
    return out;
}

std::vector<RobustnessRow> robustness_scan(
    const OptimizationProblem& p, const std::vector<double>& best_parameters,
    const std::vector<double>& factors) {
    std::vector<RobustnessRow> rows;
    const bool local =
        p.free_parameters == OptimizationProblem::Free::LocalRates;

    auto score = [&](const OptimizationProblem& prob,
                     const std::vector<double>& params) {
        return dephasing_objective(prob, spec_from_parameters(prob, params));
    };

    rows.push_back({"all x1", score(p, best_parameters)});
    for (double f : factors) {
        std::vector<double> joint = best_parameters;
        if (local) {
            for (auto& v : joint) v += std::log10(f);
        } else {
            for (auto& v : joint) v *= std::sqrt(f);
        }
        rows.push_back({"joint x" + std::to_string(f), score(p, joint)});
        if (local) {
            for (std::size_t i = 0; i < best_parameters.size(); ++i) {
                std::vector<double> single = best_parameters;
                single[i] += std::log10(f);
                rows.push_back({"site " +
                                    std::to_string(p.effective_sites()[i]) +
                                    " x" + std::to_string(f),
                                score(p, single)});
            }
        }
    }
    for (double ef : {0.95, 1.05}) {
        OptimizationProblem q = p;
        q.network.energies *= ef;
        rows.push_back({"energies x" + std::to_string(ef),
                        score(q, best_parameters)});
    }
    return rows;
}

void OptimizationResult::to_json(const std::string& path,
                                 const OptimizationProblem& p) const {
    json j;
    j["objective"] = best_objective;
    j["parameters"] = best_parameters;
    if (p.free_parameters == OptimizationProblem::Free::LocalRates) {
        const Eigen::VectorXd r = local_rates(p);
        j["rates_ps_inv"] = std::vector<double>(r.data(), r.data() + r.size());
        j["sites"] = p.effective_sites();
    } else {
        const Eigen::MatrixXd g = correlated_matrix(p);
        json rows = json::array();
        for (int r = 0; r < g.rows(); ++r) {
            json row = json::array();
            for (int c = 0; c < g.cols(); ++c) row.push_back(g(r, c));
            rows.push_back(row);
        }
        j["gamma_matrix_ps_inv"] = rows;
    }
    j["best_restart"] = best_restart;
    j["seed"] = seed;
    j["budget"] = {{"restarts", p.restarts}, {"max_evals", p.max_evals}};
    j["total_evaluations"] = total_evaluations;
    json rs = json::array();
    for (const auto& rt : restarts) {
        json r;
        r["start"] = rt.start;
        r["best"] = rt.trace.best_f;
        r["evals"] = rt.trace.evals;
        json prog = json::array();
        for (const auto& [e, v] : rt.trace.best_so_far)
            prog.push_back({{"eval", e}, {"objective", v}});
        r["progress"] = prog;
        rs.push_back(r);
    }
    j["restarts"] = rs;
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open file for writing: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace qnet
