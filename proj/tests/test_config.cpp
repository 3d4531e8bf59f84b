#include "doctest.h"
#include "qnet/config.hpp"
#include "qnet/errors.hpp"

using namespace qnet;
using nlohmann::json;

TEST_CASE("a minimal fcn config parses with sensible defaults") {
    const json j = {
        {"network", {{"fcn", {{"n", 5}}}}},
        {"integrator", {{"t_final", 10.0}}},
    };
    const RunConfig c = parse_config(j);
    CHECK(c.network.n_sites == 5);
    CHECK(c.network.couplings(0, 4) == 1.0);
    CHECK(c.dissipation.sink_site == 5);
    CHECK(c.dissipation.sink_rate == 1.0);
    CHECK(c.integrator.t_final == 10.0);
    CHECK(c.integrator.record_stride == 10);
    CHECK(c.integrator.check_convergence);
    CHECK(c.initial_state.size() == 5);
    CHECK(std::abs(c.initial_state[0]) == doctest::Approx(1.0));
    CHECK_FALSE(c.dephasing.has_value());
    CHECK_FALSE(c.modes.has_value());
}

TEST_CASE("the builtin FMO network carries its calibrated dissipation") {
    const json j = {{"network", {{"builtin", "fmo"}}},
                    {"integrator", {{"t_final", 5.0}}}};
    const RunConfig c = parse_config(j);
    CHECK(c.network.n_sites == 7);
    CHECK(c.dissipation.sink_site == 3);
    CHECK(c.dissipation.sink_rate == fmo_paestuarii().sink_rate);
    CHECK(c.dissipation.radiative_rates[0] == doctest::Approx(5e-4));
    CHECK(std::abs(c.initial_state[0]) == doctest::Approx(1.0));  // source
}

TEST_CASE("network block requires exactly one source") {
    json j = {{"network", json::object()},
              {"integrator", {{"t_final", 1.0}}}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j["network"] = {{"builtin", "fmo"}, {"fcn", {{"n", 3}}}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j["network"] = {{"builtin", "nonesuch"}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
}

TEST_CASE("noise and mode blocks are decoded") {
    const json j = {
        {"network", {{"builtin", "fmo"}}},
        {"noise",
         {{"dephasing", {{"mode", "local"}, {"rates", {1, 2, 3, 4, 5, 6, 7}}}},
          {"modes",
           {{"omega_h", 180.0},
            {"s_h", 0.22},
            {"damping", 1.0},
            {"sites", {1, 2, 3}}}}}},
        {"integrator", {{"t_final", 5.0}}},
    };
    const RunConfig c = parse_config(j);
    REQUIRE(c.dephasing.has_value());
    CHECK(c.dephasing->local_rates[6] == 7.0);
    REQUIRE(c.modes.has_value());
    CHECK(c.modes->attached_sites == std::vector<int>{1, 2, 3});
    CHECK_FALSE(c.modes->damping_over_two_pi);

    const NoiseSpec noise = c.to_noise();
    CHECK(noise.dephasing.has_value());
    CHECK(noise.modes.has_value());
    CHECK(noise.dissipation.sink_site == 3);
}

TEST_CASE("bad dephasing blocks are rejected as config errors") {
    json j = {{"network", {{"fcn", {{"n", 3}}}}},
              {"integrator", {{"t_final", 1.0}}},
              {"noise", {{"dephasing", {{"mode", "sideways"}}}}}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j["noise"]["dephasing"] = {{"mode", "local"}, {"rates", {1.0, -1.0, 0.0}}};
    CHECK_THROWS_AS(parse_config(j), qnet::Error);
}

TEST_CASE("explicit initial-state vectors are accepted and normalized") {
    const json j = {
        {"network", {{"fcn", {{"n", 2}}}}},
        {"integrator", {{"t_final", 1.0}}},
        {"initial_state", {{"vector", {{1.0, 0.0}, {-1.0, 0.0}}}}},
    };
    const RunConfig c = parse_config(j);
    CHECK(std::abs(c.initial_state.norm() - 1.0) < 1e-12);
    CHECK(c.initial_state[0].real() == doctest::Approx(std::sqrt(0.5)));
    CHECK(c.initial_state[1].real() == doctest::Approx(-std::sqrt(0.5)));
}

TEST_CASE("optimize block round trips into a problem description") {
    const json j = {
        {"network", {{"builtin", "fmo"}}},
        {"integrator", {{"t_final", 5.0}}},
        {"optimize",
         {{"free", "local"}, {"sites", {1, 2}}, {"target_time", 5.0},
          {"restarts", 4}, {"max_evals", 50}}},
        {"seed", 9},
    };
    const RunConfig c = parse_config(j);
    const OptimizationProblem p = c.to_problem();
    CHECK(p.free_parameters == OptimizationProblem::Free::LocalRates);
    CHECK(p.site_subset == std::vector<int>{1, 2});
    CHECK(p.restarts == 4);
    CHECK(p.max_evals == 50);
    CHECK(p.seed == 9);
    CHECK(p.effective_sites() == std::vector<int>{1, 2});

    json no_opt = j;
    no_opt.erase("optimize");
    CHECK_THROWS_AS(parse_config(no_opt).to_problem(), ConfigError);
}

TEST_CASE("every bundled preset parses") {
    const auto names = preset_names();
    CHECK(names.size() == 7);
    for (const std::string& expected :
         {"fcn7", "fcn7_disorder", "fmo", "fmo_optimized", "fmo_sites12",
          "fmo_correlated", "fmo_modes"})
        CHECK(std::find(names.begin(), names.end(), expected) != names.end());
    for (const auto& name : names) {
        CAPTURE(name);
        const RunConfig c = parse_config(preset_config(name));
        CHECK(c.name == name);
        CHECK(c.network.n_sites == 7);
    }
    CHECK_THROWS_AS(preset_config("nonesuch"), ConfigError);
}

TEST_CASE("malformed config files raise config errors") {
    CHECK_THROWS_AS(load_config("missing.json"), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"integrator", {{"t_final", 1.0}}}}),
                    ConfigError);
}
