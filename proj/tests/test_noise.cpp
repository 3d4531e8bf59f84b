#include <cstdlib>

#include "doctest.h"
#include "qnet/errors.hpp"
#include "qnet/noise.hpp"

using namespace qnet;

namespace {

Eigen::MatrixXcd random_state(int dim, unsigned seed) {
    std::srand(seed);
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Random(dim, dim);
    Eigen::MatrixXcd rho = a * a.adjoint();
    rho /= rho.trace().real();
    return rho;
}

}  // namespace

TEST_CASE("local dephasing damps coherences and preserves populations") {
    const int n = 4;
    Eigen::VectorXd rates(n);
    rates << 0.3, 0.0, 1.7, 2.5;
    const DephasingSpec spec = DephasingSpec::local(rates);
    const Eigen::MatrixXcd rho = random_state(n + 2, 11);
    const Eigen::MatrixXcd out = apply_local_dephasing(rho, spec);

    for (int d = 0; d < n + 2; ++d) CHECK(std::abs(out(d, d)) < 1e-15);
    // Site-site coherence decays at the sum of the two rates.
    CHECK(out(1, 3) == -(rates[0] + rates[2]) * rho(1, 3));
    // Coherence to the ground state decays at the site's own rate.
    CHECK(out(3, 0) == -rates[2] * rho(3, 0));
    // Sink column behaves like any undephased level.
    CHECK(out(4, 5) == -rates[3] * rho(4, 5));
    // Site 2 has zero rate, so its ground coherence is untouched.
    CHECK(std::abs(out(2, 0)) == 0.0);
    CHECK(std::abs(out.trace()) < 1e-15);
}

TEST_CASE("dephasing of a diagonal state vanishes") {
    const DephasingSpec spec = DephasingSpec::uniform(3, 2.0);
    Eigen::VectorXd pops(5);
    pops << 0.1, 0.2, 0.3, 0.25, 0.15;
    const Eigen::MatrixXcd rho = pops.cast<Complex>().asDiagonal();
    CHECK(apply_local_dephasing(rho, spec).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dephasing spec validation") {
    CHECK_THROWS_AS(DephasingSpec::local(Eigen::VectorXd()),
                    ValidationError);
    Eigen::VectorXd bad(2);
    bad << 1.0, -0.5;
    CHECK_THROWS_AS(DephasingSpec::local(bad), ValidationError);
    CHECK_THROWS_AS(
        apply_local_dephasing(Eigen::MatrixXcd::Identity(3, 3),
                              DephasingSpec::uniform(3, 1.0)),
        DimensionMismatch);
    CHECK_THROWS_AS(
        apply_local_dephasing(Eigen::MatrixXcd::Identity(5, 5),
                              DephasingSpec::correlated(
                                  Eigen::MatrixXd::Identity(3, 3))),
        ValidationError);
}

TEST_CASE("correlated dephasing with a diagonal matrix reduces to local") {
    const int n = 5;
    Eigen::VectorXd rates(n);
    rates << 0.4, 1.1, 0.0, 3.2, 0.7;
    const Eigen::MatrixXcd rho = random_state(n + 2, 23);
    const Eigen::MatrixXcd local =
        apply_local_dephasing(rho, DephasingSpec::local(rates));
    const Eigen::MatrixXcd corr = apply_correlated_dephasing(
        rho, Eigen::MatrixXd(rates.asDiagonal()));
    CHECK((local - corr).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("fully correlated dephasing leaves site-site coherences alone") {
    const int n = 3;
    const Eigen::MatrixXd gamma = Eigen::MatrixXd::Ones(n, n);  // rank one
    const Eigen::MatrixXcd rho = random_state(n + 2, 37);
    const Eigen::MatrixXcd out = apply_correlated_dephasing(rho, gamma);
    // All sites fluctuate in unison, so relative phases between sites
    // survive; only coherences to ground and sink decay.
    CHECK(std::abs(out(1, 2)) < 1e-14);
    CHECK(std::abs(out(1, 3)) < 1e-14);
    CHECK(std::abs(out(2, 3)) < 1e-14);
    CHECK(out(1, 0) == -rho(1, 0));
    CHECK(out(2, 4) == -rho(2, 4));
    CHECK(std::abs(out.trace()) < 1e-14);
}

TEST_CASE("correlated dephasing rejects invalid matrices") {
    Eigen::MatrixXd notpsd(2, 2);
    notpsd << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, -1
    CHECK_THROWS_AS(DephasingSpec::correlated(notpsd), ValidationError);
    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.5, 0.2, 1.0;
    CHECK_THROWS_AS(DephasingSpec::correlated(asym), ValidationError);
    CHECK_THROWS_AS(DephasingSpec::correlated(Eigen::MatrixXd::Ones(2, 3)),
                    ValidationError);
}

TEST_CASE("radiative decay feeds the ground state at twice the rate") {
    const int n = 3;
    DissipationSpec spec;
    spec.radiative_rates = Eigen::VectorXd::Zero(n);
    spec.radiative_rates[1] = 0.25;
    spec.validate();
    const Eigen::MatrixXcd rho = random_state(n + 2, 5);
    const Eigen::MatrixXcd out = apply_radiative(rho, spec);
    CHECK(out(2, 2) == -2.0 * 0.25 * rho(2, 2));
    CHECK(out(0, 0) == 2.0 * 0.25 * rho(2, 2));
    CHECK(std::abs(out(1, 1)) == 0.0);
    CHECK(out(2, 3) == -0.25 * rho(2, 3));
    CHECK(std::abs(out.trace()) < 1e-15);

    // Ground-state population is dark.
    Eigen::MatrixXcd ground = Eigen::MatrixXcd::Zero(n + 2, n + 2);
    ground(0, 0) = 1.0;
    CHECK(apply_radiative(ground, spec).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sink drains the coupled site irreversibly") {
    const int n = 4;
    const DissipationSpec spec = DissipationSpec::sink_only(n, 3, 2.0);
    const Eigen::MatrixXcd rho = random_state(n + 2, 7);
    const Eigen::MatrixXcd out = apply_sink(rho, spec);
    CHECK(out(3, 3) == -2.0 * 2.0 * rho(3, 3));
    CHECK(out(5, 5) == 2.0 * 2.0 * rho(3, 3));
    CHECK(out(3, 1) == -2.0 * rho(3, 1));
    CHECK(std::abs(out(1, 1)) == 0.0);
    CHECK(std::abs(out.trace()) < 1e-15);
    CHECK(out(5, 5).real() >= 0.0);  // sink flow is never negative

    DissipationSpec none;
    none.radiative_rates = Eigen::VectorXd::Zero(n);
    CHECK(apply_sink(rho, none).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dissipation spec validation") {
    CHECK_THROWS_AS(DissipationSpec::sink_only(4, 5, 1.0), ValidationError);
    CHECK_THROWS_AS(DissipationSpec::sink_only(4, 3, 0.0), ValidationError);
    CHECK_THROWS_AS(DissipationSpec::sink_only(4, -1, 1.0), ValidationError);
    DissipationSpec s;
    s.radiative_rates = Eigen::VectorXd::Constant(3, -1.0);
    CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("local mode coupling follows the Huang-Rhys factor") {
    LocalModeSpec m;
    m.attached_sites = {1, 2, 3, 4, 5, 6, 7};
    CHECK(m.coupling() ==
          doctest::Approx(std::sqrt(0.22) * 180.0).epsilon(1e-12));
    CHECK(m.coupling() == doctest::Approx(84.4299).epsilon(1e-4));
    m.validate(7);

    LocalModeSpec bad = m;
    bad.attached_sites = {};
    CHECK_THROWS_AS(bad.validate(7), ValidationError);
    bad = m;
    bad.attached_sites = {8};
    CHECK_THROWS_AS(bad.validate(7), ValidationError);
    bad = m;
    bad.mode_frequency = 0.0;
    CHECK_THROWS_AS(bad.validate(7), ValidationError);
    bad = m;
    bad.huang_rhys = -0.1;
    CHECK_THROWS_AS(bad.validate(7), ValidationError);
    bad = m;
    bad.mode_damping = -1.0;
    CHECK_THROWS_AS(bad.validate(7), ValidationError);
}
