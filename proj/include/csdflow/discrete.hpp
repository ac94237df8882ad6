#pragma once

#include "csdflow/profile.hpp"

#include <span>
#include <vector>

// Node-index finite differences and quadrature shared by the geometry,
// curvature and flow code. Derivatives are taken with respect to the node
// label u (unit spacing); callers convert to arc length with the speed |x_u|.
namespace csdflow::discrete {

// Behaviour of a nodal field under reflection through a pole. Axisymmetric
// scalars (H, curvatures, z) are even; r and first arc-length derivatives of
// even fields are odd.
enum class Parity { Even, Odd };

// Centred first and second derivatives of order 4 (default) or 8. Pole
// ghosts come from the mirror image of the profile, Ring ghosts from
// periodic wrap.
void diff(std::span<const double> f, Topology topology, Parity parity, std::span<double> du,
          std::span<double> duu, int order = 4);
void diff1(std::span<const double> f, Topology topology, Parity parity, std::span<double> du, int order = 4);

// Weights in u for integrating a smooth nodal function over the profile:
// composite Simpson (with a 3/8 closing panel for an odd interval count) for
// PoleToPole, periodic trapezoid for Ring.
std::vector<double> quadrature_weights(std::size_t n, Topology topology);

// Pole node indices for PoleToPole profiles (empty for Ring).
inline bool is_pole(std::size_t i, std::size_t n, Topology topology) {
    return topology == Topology::PoleToPole && (i == 0 || i + 1 == n);
}

// Value at a pole of an even field known at the interior nodes next to it:
// even polynomial in u through 3 (order 4) or 4 (order 8) neighbours. Keeps
// quotients such as z_s / r continuous with their interior discretization.
inline double pole_limit(std::span<const double> f, std::size_t pole, int order = 4) {
    const std::size_t n = f.size();
    auto at = [&](std::size_t j) { return pole == 0 ? f[j] : f[n - 1 - j]; };
    if (order == 8) return 1.6 * at(1) - 0.8 * at(2) + (8.0 / 35.0) * at(3) - (1.0 / 35.0) * at(4);
    return 1.5 * at(1) - 0.6 * at(2) + 0.1 * at(3);
}

} // namespace csdflow::discrete
