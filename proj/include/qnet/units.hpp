#pragma once

#include <numbers>

namespace qnet {

/// Angular-frequency conversion: 2*pi*c*100 m/s in rad/ps per cm^-1.
inline constexpr double kWavenumberToAngular = 0.1883651567;

enum class UnitKind {
    Dimensionless,  // energies, rates and times share one arbitrary scale
    Spectroscopic,  // energies in cm^-1, times in ps, rates in ps^-1
};

struct UnitSystem {
    UnitKind kind = UnitKind::Dimensionless;

    /// Factor converting a stored energy value to angular frequency
    /// (rad/ps for spectroscopic systems, identity otherwise).
    double energy_to_angular() const {
        return kind == UnitKind::Spectroscopic ? kWavenumberToAngular : 1.0;
    }

    bool operator==(const UnitSystem&) const = default;
};

/// Converts a rate quoted in cm^-1 to ps^-1. The default convention
/// multiplies by the angular factor; the alternative divides that by 2*pi.
inline double rate_from_wavenumber(double rate_cm, bool over_two_pi = false) {
    double k = kWavenumberToAngular;
    if (over_two_pi) k /= 2.0 * std::numbers::pi;
    return rate_cm * k;
}

}  // namespace qnet
