#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qnet/analysis.hpp"
#include "qnet/config.hpp"
#include "qnet/errors.hpp"
#include "qnet/optimize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::string preset;
    int threads = 1;
    std::vector<int> modes_subset;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("config", args.config_path, "JSON config file");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--threads", args.threads, "Eigen thread count");
    cmd->add_option("--preset", args.preset, "bundled preset name");
    cmd->add_option("--modes-subset", args.modes_subset,
                    "attach local modes only to these sites (reduced run)")
        ->delimiter(',');
}

qnet::RunConfig resolve_config(const CommonArgs& args) {
    if (!args.preset.empty() && !args.config_path.empty())
        throw qnet::ConfigError("give a config file or --preset, not both");
    qnet::RunConfig cfg;
    if (!args.preset.empty()) {
        cfg = qnet::parse_config(qnet::preset_config(args.preset));
    } else {
        if (args.config_path.empty())
            throw qnet::ConfigError("missing config file (or use --preset)");
        cfg = qnet::load_config(args.config_path);
    }
    if (!args.modes_subset.empty()) {
        if (!cfg.modes)
            throw qnet::ConfigError(
                "--modes-subset needs a config with a modes block");
        cfg.modes->attached_sites = args.modes_subset;
        cfg.modes->validate(cfg.network.n_sites);
    }
    return cfg;
}

fs::path out_file(const CommonArgs& args, const std::string& leaf) {
    fs::create_directories(args.out_dir);
    return fs::path(args.out_dir) / leaf;
}

qnet::GeneratorSet make_generators(const qnet::RunConfig& cfg) {
    return qnet::build_generators(cfg.network, cfg.to_noise());
}

qnet::DensityMatrix make_initial(const qnet::RunConfig& cfg) {
    const int n_modes =
        cfg.modes ? static_cast<int>(cfg.modes->attached_sites.size()) : 0;
    return qnet::pure_site_state(cfg.initial_state, n_modes);
}

int cmd_run(const CommonArgs& args) {
    const qnet::RunConfig cfg = resolve_config(args);
    qnet::IntegratorConfig icfg = cfg.integrator;
    if (icfg.t_final <= 0.0) throw qnet::ConfigError("integrator.t_final missing");
    const qnet::GeneratorSet gens = make_generators(cfg);
    const qnet::Trajectory traj = qnet::evolve(make_initial(cfg), gens, icfg);
    traj.to_csv(out_file(args, cfg.name + "_trajectory.csv").string());
    traj.to_json(out_file(args, cfg.name + "_trajectory.json").string());
    std::printf("%s: p_sink(%.6g) = %.6f  coherence_lifetime = %.4f\n",
                cfg.name.c_str(), icfg.t_final, traj.final_sink(),
                traj.coherence_lifetime());
    if (traj.mode_excitation_max.size() > 0)
        std::printf("%s: max mode occupation = %.4f\n", cfg.name.c_str(),
                    traj.mode_excitation_max.maxCoeff());
    return 0;
}

int cmd_sweep(const CommonArgs& args) {
    const qnet::RunConfig cfg = resolve_config(args);
    if (!cfg.sweep) throw qnet::ConfigError("config has no sweep block");
    const auto& sw = *cfg.sweep;

    std::vector<std::pair<double, double>> rows;
    if (sw.parameter == "dephasing_uniform") {
        rows = qnet::dephasing_sweep(cfg.network, cfg.dissipation, sw.grid,
                                     sw.t_fixed, cfg.integrator);
    } else if (sw.parameter == "mode_damping") {
        if (!cfg.modes)
            throw qnet::ConfigError("mode_damping sweep needs a modes block");
        for (double g : sw.grid) {
            qnet::RunConfig point = cfg;
            point.modes->mode_damping = g;
            qnet::IntegratorConfig icfg = point.integrator;
            icfg.t_final = sw.t_fixed;
            const qnet::Trajectory traj =
                qnet::evolve(make_initial(point), make_generators(point), icfg);
            rows.emplace_back(g, traj.final_sink());
        }
    } else {
        throw qnet::ConfigError("unknown sweep parameter: " + sw.parameter);
    }

    std::ofstream out(out_file(args, cfg.name + "_sweep.csv"));
    out << sw.parameter << ",p_sink\n";
    char buf[64];
    std::size_t best = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", rows[i].first,
                      rows[i].second);
        out << buf;
        if (rows[i].second > rows[best].second) best = i;
    }
    std::printf("%s: max p_sink(%.6g) = %.6f at %s = %.6g\n", cfg.name.c_str(),
                sw.t_fixed, rows[best].second, sw.parameter.c_str(),
                rows[best].first);
    return 0;
}

int cmd_optimize(const CommonArgs& args) {
    const qnet::RunConfig cfg = resolve_config(args);
    const qnet::OptimizationProblem problem = cfg.to_problem();
    const qnet::OptimizationResult result =
        problem.free_parameters ==
                qnet::OptimizationProblem::Free::CorrelatedMatrix
            ? qnet::optimize_correlated(problem)
            : qnet::optimize_local(problem);
    result.to_json(out_file(args, cfg.name + "_optimize.json").string(),
                   problem);
    std::printf("%s: best p_sink(%.6g) = %.6f after %ld evaluations\n",
                cfg.name.c_str(), problem.target_time, result.best_objective,
                result.total_evaluations);
    return 0;
}

int cmd_invariant(const CommonArgs& args) {
    const qnet::RunConfig cfg = resolve_config(args);
    int k = cfg.invariant_sink_site ? cfg.invariant_sink_site
                                    : cfg.dissipation.sink_site;
    if (k == 0) throw qnet::ConfigError("no sink site configured");
    const Eigen::MatrixXcd h = cfg.network.site_matrix();
    const qnet::InvariantSubspace inv = qnet::invariant_subspace(h, k);
    const double trapped =
        (inv.basis.adjoint() * cfg.initial_state).squaredNorm();

    json j;
    j["sink_coupled_site"] = k;
    j["dimension"] = inv.dimension;
    j["degenerate_spectrum"] = inv.degenerate_spectrum;
    j["asymptotic_sink"] = 1.0 - trapped;
    j["trapped_weight"] = trapped;
    std::ofstream out(out_file(args, cfg.name + "_invariant.json"));
    out << j.dump(2) << '\n';
    std::printf(
        "%s: invariant dimension = %d  asymptotic p_sink = %.6f%s\n",
        cfg.name.c_str(), inv.dimension, 1.0 - trapped,
        inv.degenerate_spectrum ? "  (degenerate spectrum)" : "");
    return 0;
}

int cmd_pathways(const CommonArgs& args) {
    const qnet::RunConfig cfg = resolve_config(args);
    qnet::FmoSystem sys;
    sys.hamiltonian = cfg.network;
    sys.sink_site = cfg.dissipation.sink_site;
    sys.sink_rate = cfg.dissipation.sink_rate;
    sys.radiative_rate = 0.0;
    const qnet::PathwayReport rep = qnet::pathway_report(sys, cfg.pathways);
    rep.to_json(out_file(args, cfg.name + "_pathways.json").string());
    std::printf(
        "%s: baseline = %.6g  pathII/pathI = %.4f  minus6 speedup = %.4f\n",
        cfg.name.c_str(), rep.baseline_rate, rep.path2_over_path1,
        rep.minus6_speedup);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qnet: excitation transfer in dissipative quantum networks"};
    app.require_subcommand(1);

    CommonArgs args;
    auto* run = app.add_subcommand("run", "propagate one trajectory");
    auto* sweep = app.add_subcommand("sweep", "scan a noise parameter");
    auto* optimize = app.add_subcommand("optimize", "optimize dephasing rates");
    auto* invariant =
        app.add_subcommand("invariant", "invariant-subspace analysis");
    auto* pathways =
        app.add_subcommand("pathways", "hybrid-basis pathway analysis");
    for (auto* cmd : {run, sweep, optimize, invariant, pathways})
        add_common(cmd, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        Eigen::setNbThreads(args.threads);
        if (run->parsed()) return cmd_run(args);
        if (sweep->parsed()) return cmd_sweep(args);
        if (optimize->parsed()) return cmd_optimize(args);
        if (invariant->parsed()) return cmd_invariant(args);
        return cmd_pathways(args);
    } catch (const qnet::NumericalInstability& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const qnet::StepTooLarge& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const qnet::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
