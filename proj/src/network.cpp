#include "qnet/network.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "json.hpp"
#include "qnet/errors.hpp"

namespace qnet {

using nlohmann::json;

Eigen::MatrixXd NetworkHamiltonian::site_matrix() const {
    Eigen::MatrixXd h = couplings;
    h.diagonal() = energies;
    return h;
}

void NetworkHamiltonian::validate() const {
    if (n_sites < 2) throw InvalidNetwork("network needs at least 2 sites");
    if (energies.size() != n_sites)
        throw DimensionMismatch("energies length does not match n_sites");
    if (couplings.rows() != n_sites || couplings.cols() != n_sites)
        throw DimensionMismatch("couplings matrix does not match n_sites");
    if ((couplings - couplings.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw ValidationError("couplings matrix is not symmetric");
    if (couplings.diagonal().cwiseAbs().maxCoeff() > 0.0)
        throw ValidationError("couplings matrix has a nonzero diagonal");
    if (!labels.empty() && static_cast<int>(labels.size()) != n_sites)
        throw ValidationError("labels length does not match n_sites");
}

NetworkHamiltonian build_fcn(int n, double j_coupling,
                             const Eigen::VectorXd& energies) {
    if (n < 2) throw InvalidNetwork("FCN needs at least 2 sites");
    if (energies.size() != n)
        throw DimensionMismatch("energies length does not match n");
    NetworkHamiltonian h;
    h.n_sites = n;
    h.energies = energies;
    h.couplings = Eigen::MatrixXd::Constant(n, n, j_coupling);
    h.couplings.diagonal().setZero();
    h.units.kind = UnitKind::Dimensionless;
    return h;
}

NetworkHamiltonian build_fcn(int n, double j_coupling) {
    if (n < 2) throw InvalidNetwork("FCN needs at least 2 sites");
    return build_fcn(n, j_coupling, Eigen::VectorXd::Zero(n));
}

Eigen::VectorXd disordered_energies(int n, std::uint64_t seed) {
    // 53-bit mantissa draw; avoids the implementation-defined
    // uniform_real_distribution so seeds reproduce across platforms.
    std::mt19937_64 rng(seed);
    Eigen::VectorXd e(n);
    for (int i = 0; i < n; ++i)
        e[i] = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return e;
}

void BasisTransform::validate() const {
    const auto n = unitary.rows();
    if (unitary.cols() != n) throw ValidationError("transform is not square");
    Eigen::MatrixXcd g = unitary.adjoint() * unitary;
    if ((g - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-12)
        throw ValidationError("transform is not unitary");
}

BasisTransform hybrid_transform(int i, int j, int n_sites) {
    if (i == j) throw InvalidPair("hybrid pair must be two distinct sites");
    if (i < 1 || i > n_sites || j < 1 || j > n_sites)
        throw InvalidPair("hybrid pair site index out of range");
    BasisTransform t;
    t.unitary = Eigen::MatrixXcd::Identity(n_sites, n_sites);
    const double s = 1.0 / std::sqrt(2.0);
    t.unitary(i - 1, i - 1) = s;
    t.unitary(i - 1, j - 1) = s;
    t.unitary(j - 1, i - 1) = s;
    t.unitary(j - 1, j - 1) = -s;
    t.description = "hybrid (|" + std::to_string(i) + "> +- |" +
                    std::to_string(j) + ">)/sqrt(2)";
    return t;
}

Eigen::MatrixXcd transform_hamiltonian(const Eigen::MatrixXcd& h,
                                       const BasisTransform& u) {
    if (h.rows() != u.unitary.rows() || h.cols() != u.unitary.cols())
        throw DimensionMismatch("transform/Hamiltonian dimension mismatch");
    return u.unitary * h * u.unitary.adjoint();
}

Eigen::MatrixXcd edit_coupling(const Eigen::MatrixXcd& h, int state_a,
                               int state_b, Complex new_value) {
    if (state_a < 1 || state_a > h.rows() || state_b < 1 || state_b > h.rows())
        throw DimensionMismatch("edit_coupling index out of range");
    Eigen::MatrixXcd out = h;
    out(state_a - 1, state_b - 1) = new_value;
    out(state_b - 1, state_a - 1) = std::conj(new_value);
    return out;
}

void FmoSystem::validate() const {
    hamiltonian.validate();
    if (source_site < 1 || source_site > hamiltonian.n_sites)
        throw ValidationError("source_site out of range");
    if (sink_site < 1 || sink_site > hamiltonian.n_sites)
        throw ValidationError("sink_site out of range");
    if (sink_rate <= 0.0) throw ValidationError("sink_rate must be positive");
    if (radiative_rate < 0.0)
        throw ValidationError("radiative_rate must be non-negative");
}

namespace {

// 7-site FMO monomer of P. aestuarii (cm^-1), site energies relative to
// site 3. Transcribed from Adolphs & Renger, Biophys. J. 91, 2778 (2006).
constexpr double kFmoEnergies[7] = {215.0, 220.0, 0.0, 125.0,
                                    450.0, 330.0, 280.0};
constexpr double kFmoCouplings[7][7] = {
    {0.0, -104.1, 5.1, -4.3, 4.7, -15.1, -7.8},
    {-104.1, 0.0, 32.6, 7.1, 5.4, 8.3, 0.8},
    {5.1, 32.6, 0.0, -46.8, 1.0, -8.1, 5.1},
    {-4.3, 7.1, -46.8, 0.0, -70.7, -14.7, -61.5},
    {4.7, 5.4, 1.0, -70.7, 0.0, 89.7, -2.5},
    {-15.1, 8.3, -8.1, -14.7, 89.7, 0.0, 32.7},
    {-7.8, 0.8, 5.1, -61.5, -2.5, 32.7, 0.0}};

// Calibrated so the noiseless run gives p_sink(5 ps) = 0.57 +- 0.005.
constexpr double kFmoSinkRate = 6.8;  // ps^-1

// Population decay 2*Gamma = 1/(1 ns).
constexpr double kFmoRadiativeRate = 5.0e-4;  // ps^-1

}  // namespace

FmoSystem fmo_paestuarii() {
    FmoSystem sys;
    sys.hamiltonian.n_sites = 7;
    sys.hamiltonian.energies = Eigen::Map<const Eigen::VectorXd>(kFmoEnergies, 7);
    sys.hamiltonian.couplings.resize(7, 7);
    for (int r = 0; r < 7; ++r)
        for (int c = 0; c < 7; ++c)
            sys.hamiltonian.couplings(r, c) = kFmoCouplings[r][c];
    sys.hamiltonian.units.kind = UnitKind::Spectroscopic;
    sys.source_site = 1;
    sys.sink_site = 3;
    sys.sink_rate = kFmoSinkRate;
    sys.radiative_rate = kFmoRadiativeRate;
    sys.validate();
    return sys;
}

namespace {

json network_to_json(const NetworkHamiltonian& h, const std::string& provenance) {
    json j;
    j["units"] = h.units.kind == UnitKind::Spectroscopic ? "cm-1" : "dimensionless";
    j["n_sites"] = h.n_sites;
    j["energies"] = std::vector<double>(h.energies.data(),
                                        h.energies.data() + h.n_sites);
    json rows = json::array();
    for (int r = 0; r < h.n_sites; ++r) {
        json row = json::array();
        for (int c = 0; c < h.n_sites; ++c) row.push_back(h.couplings(r, c));
        rows.push_back(row);
    }
    j["couplings"] = rows;
    if (!h.labels.empty()) j["labels"] = h.labels;
    if (!provenance.empty()) j["provenance"] = provenance;
    return j;
}

NetworkHamiltonian network_from_json(const json& j) {
    NetworkHamiltonian h;
    try {
        const std::string units = j.at("units").get<std::string>();
        if (units == "cm-1")
            h.units.kind = UnitKind::Spectroscopic;
        else if (units == "dimensionless")
            h.units.kind = UnitKind::Dimensionless;
        else
            throw FormatError("unknown units: " + units);
        h.n_sites = j.at("n_sites").get<int>();
        const auto e = j.at("energies").get<std::vector<double>>();
        h.energies = Eigen::Map<const Eigen::VectorXd>(e.data(),
                                                       static_cast<long>(e.size()));
        const auto rows = j.at("couplings");
        if (!rows.is_array() || static_cast<int>(rows.size()) != h.n_sites)
            throw FormatError("couplings must be a full n_sites x n_sites matrix");
        h.couplings.resize(h.n_sites, h.n_sites);
        for (int r = 0; r < h.n_sites; ++r) {
            const auto row = rows.at(r).get<std::vector<double>>();
            if (static_cast<int>(row.size()) != h.n_sites)
                throw FormatError("couplings row has wrong length");
            for (int c = 0; c < h.n_sites; ++c) h.couplings(r, c) = row[c];
        }
        if (j.contains("labels"))
            h.labels = j.at("labels").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("network file parse failure: ") + e.what());
    }
    h.validate();
    return h;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError(std::string("JSON parse failure in ") + path + ": " +
                          e.what());
    }
    return j;
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open file for writing: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace

NetworkHamiltonian load_network(const std::string& path) {
    return network_from_json(load_json_file(path));
}

void save_network(const NetworkHamiltonian& h, const std::string& path,
                  const std::string& provenance) {
    h.validate();
    write_json_file(network_to_json(h, provenance), path);
}

FmoSystem load_fmo(const std::string& path) {
    const json j = load_json_file(path);
    FmoSystem sys;
    sys.hamiltonian = network_from_json(j);
    try {
        sys.source_site = j.value("source", 1);
        const auto& sink = j.at("sink");
        sys.sink_site = sink.at("site").get<int>();
        sys.sink_rate = sink.at("rate").get<double>();
        sys.radiative_rate = j.value("radiative_rate", 0.0);
    } catch (const json::exception& e) {
        throw FormatError(std::string("sink/source parse failure: ") + e.what());
    }
    sys.validate();
    return sys;
}

void save_fmo(const FmoSystem& sys, const std::string& path,
              const std::string& provenance) {
    sys.validate();
    json j = network_to_json(sys.hamiltonian, provenance);
    j["sink"] = {{"site", sys.sink_site}, {"rate", sys.sink_rate}};
    j["source"] = sys.source_site;
    j["radiative_rate"] = sys.radiative_rate;
    write_json_file(j, path);
}

}  // namespace qnet
