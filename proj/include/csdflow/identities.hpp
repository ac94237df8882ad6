#pragma once

#include "csdflow/constraint.hpp"
#include "csdflow/flow.hpp"
#include "csdflow/profile.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace csdflow {

// Static identities are evaluated with the flow's order-4 stencils unless
// asked otherwise. On umbilic surfaces the order-4 kp/kr offset (O(ds^4)
// divided by r^2 near the poles) dominates; order 8 resolves them down to
// the round-off in the node data.
constexpr int kUmbilicOrder = 8;

struct ResidualReport {
    std::string name;
    double max = 0.0;
    double l2 = 0.0; // (integral of residual^2 dmu)^(1/2)
    std::size_t nodes = 0;
    double dt = std::numeric_limits<double>::quiet_NaN(); // time step (evolution identities)
    double order = std::numeric_limits<double>::quiet_NaN();
};

// Simons' identity, both diagonal components in the rotation frame.
ResidualReport simons_residual(const ProfileSurface& s, int order = 4);

// H^2 - |A|^2 against the scalar curvature computed intrinsically from the
// warped metric ds^2 + r(s)^2 g_{S^k}.
ResidualReport gauss_residual(const ProfileSurface& s, int order = 4);
// H^2 - |A|^2 against 2 kp kr (k = 1) or 4 kp kr + 2 kr^2 (k = 2).
ResidualReport gauss_algebraic_residual(const ProfileSurface& s, int order = 4);
// g^{ij} A_ij - H and tr A° (the latter with A° = A - H g / n).
ResidualReport trace_residual(const ProfileSurface& s, int order = 4);
// d(kr)/ds - (r_s / r)(kp - kr).
ResidualReport codazzi_residual(const ProfileSurface& s, int order = 4);

std::vector<ResidualReport> static_residuals(const ProfileSurface& s, int order = 4);

// Observed order from residuals at node counts n_coarse < n_fine.
double convergence_order(double coarse, double fine, std::size_t n_coarse, std::size_t n_fine);
// Fills order on `fine` from matching names in `coarse`, using max residuals.
void attach_orders(const std::vector<ResidualReport>& coarse, std::vector<ResidualReport>& fine);

// The first-order evolution laws checked by a centred difference in time
// across a, b, c (b in the middle, equal spacing, fixed node labels):
// metric, measure, normal, mean curvature, second fundamental form and its
// tracefree part.
std::vector<ResidualReport> evolution_residuals(const Snapshot& a, const Snapshot& b, const Snapshot& c,
                                                const ConstraintFunction& h);

struct EvolutionStudy {
    std::vector<ResidualReport> coarse; // window half-width tau
    std::vector<ResidualReport> fine;   // window half-width tau / 2
    std::vector<double> ratio;          // coarse.max / fine.max
    std::vector<bool> converges;        // ratio >= 3.5
    // The two windows agree to 5%: the centred difference is exact for this
    // solution and what remains is the spatial error.
    std::vector<bool> dt_exact;
};

// Evolves s0 with remeshing off and a fixed step so that snapshots land at
// multiples of tau / 2 on [0, 2 tau]; compares windows centred at tau with
// half-widths tau and tau / 2.
EvolutionStudy evolution_study(const ProfileSurface& s0, const ConstraintFunction& h, double tau,
                               double fixed_dt);

struct ScaleInvarianceReport {
    int m = 2;
    double lambda = 1.0;
    double value = 0.0;
    double scaled_value = 0.0;
    double ratio = 0.0;    // scaled_value / value
    double expected = 1.0; // lambda^(n - m)
    double relative_error = 0.0; // |ratio - expected| / expected
};

ScaleInvarianceReport scale_invariance_check(const ProfileSurface& s, double lambda, int m);

} // namespace csdflow
