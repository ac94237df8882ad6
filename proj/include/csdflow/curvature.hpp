#pragma once

#include "csdflow/discrete.hpp"
#include "csdflow/profile.hpp"

#include <span>
#include <vector>

namespace csdflow {

// First- and second-order geometry of the discrete parametrization u -> (r, z)
// (u = node label). Everything downstream is expressed through these arrays.
struct ProfileFrame {
    Topology topology = Topology::PoleToPole;
    int k = 1;
    int order = 4; // finite-difference order used for every derived field
    std::vector<double> r, z;
    std::vector<double> r_u, z_u, r_uu, z_uu;
    std::vector<double> speed;   // |x_u|
    std::vector<double> speed_u; // d|x_u|/du
    std::vector<double> nu_r, nu_z;
    std::vector<double> kappa_p, kappa_rot;

    std::size_t size() const { return r.size(); }
    bool pole(std::size_t i) const { return discrete::is_pole(i, r.size(), topology); }
    // dr/ds, the cosine of the angle between the meridian and the axis normal.
    double r_s(std::size_t i) const { return r_u[i] / speed[i]; }
};

ProfileFrame make_frame(std::span<const double> r, std::span<const double> z, int k,
                        Topology topology, int order = 4);
ProfileFrame make_frame(const ProfileSurface& s, int order = 4);

// Arc-length derivatives of a nodal field of the given parity.
struct ArcDerivatives {
    std::vector<double> ds;
    std::vector<double> dss;
};
ArcDerivatives arc_derivatives(const ProfileFrame& f, std::span<const double> field,
                               discrete::Parity parity);

// (r_s / r) * g for a field g that vanishes at the poles like an odd
// function; at pole nodes the limit g_s / r_s is used.
double over_r(const ProfileFrame& f, std::size_t i, double g, double g_s);

struct CurvatureField {
    std::vector<double> kappa_p;   // meridian curvature
    std::vector<double> kappa_rot; // rotational curvature, multiplicity k
    std::vector<double> H;
    std::vector<double> normsqA;
    std::vector<double> normsqAo;
    std::vector<double> gradH;       // |grad H|
    std::vector<double> normsqGradA; // |grad A|^2
    std::vector<double> normsqHessA; // |grad^2 A|^2
    std::vector<double> nu_r, nu_z;  // outer unit normal in the half-plane

    std::size_t size() const { return H.size(); }
};

CurvatureField curvature(const ProfileSurface& s);
CurvatureField curvature(const ProfileFrame& f);

std::vector<double> laplace_beltrami(const ProfileSurface& s, std::span<const double> u);
std::vector<double> laplace_beltrami(const ProfileFrame& f, std::span<const double> u);

// Per-node weights W with  integral over M of phi  ~=  sum_i W_i phi_i.
std::vector<double> measure_weights(const ProfileFrame& f);
std::vector<double> measure_weights(const ProfileSurface& s);

double integrate(const ProfileSurface& s, std::span<const double> phi);
double integrate(std::span<const double> weights, std::span<const double> phi);

// Fraction of each node's dual cell (orbit-averaged) lying inside the ball.
std::vector<double> ball_fractions(const ProfileSurface& s, const BoundingBall& ball);
double ball_integral(const ProfileSurface& s, std::span<const double> phi, const BoundingBall& ball);
double ball_integral(std::span<const double> weights, std::span<const double> fractions,
                     std::span<const double> phi);

} // namespace csdflow
