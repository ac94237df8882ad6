#include "csdflow/curvature.hpp"

#include "csdflow/errors.hpp"

#include <algorithm>
#include <cmath>

namespace csdflow {

using discrete::Parity;

ProfileFrame make_frame(std::span<const double> r, std::span<const double> z, int k,
                        Topology topology, int order) {
    if (order != 4 && order != 8) fail(ErrorKind::BadParameter, "difference order must be 4 or 8");
    const std::size_t n = r.size();
    ProfileFrame f;
    f.topology = topology;
    f.k = k;
    f.order = order;
    f.r.assign(r.begin(), r.end());
    f.z.assign(z.begin(), z.end());
    f.r_u.resize(n);
    f.z_u.resize(n);
    f.r_uu.resize(n);
    f.z_uu.resize(n);
    discrete::diff(f.r, topology, Parity::Odd, f.r_u, f.r_uu, order);
    discrete::diff(f.z, topology, Parity::Even, f.z_u, f.z_uu, order);
    f.speed.resize(n);
    f.speed_u.resize(n);
    f.nu_r.resize(n);
    f.nu_z.resize(n);
    f.kappa_p.resize(n);
    f.kappa_rot.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double L = std::hypot(f.r_u[i], f.z_u[i]);
        if (!(L > 0.0) || !std::isfinite(L)) fail(ErrorKind::DegenerateGeometry, "zero or non-finite speed");
        f.speed[i] = L;
        f.speed_u[i] = (f.r_u[i] * f.r_uu[i] + f.z_u[i] * f.z_uu[i]) / L;
        f.nu_r[i] = f.z_u[i] / L;
        f.nu_z[i] = -f.r_u[i] / L;
        f.kappa_p[i] = (f.r_u[i] * f.z_uu[i] - f.z_u[i] * f.r_uu[i]) / (L * L * L);
        if (f.pole(i)) {
            f.kappa_rot[i] = 0.0;
        } else {
            if (!(f.r[i] > 0.0)) fail(ErrorKind::DegenerateGeometry, "interior node reached the axis");
            f.kappa_rot[i] = f.z_u[i] / (L * f.r[i]);
        }
    }
    if (topology == Topology::PoleToPole)
        for (std::size_t i : {std::size_t{0}, n - 1}) f.kappa_rot[i] = discrete::pole_limit(f.kappa_rot, i, order);
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(f.kappa_p[i]) || !std::isfinite(f.kappa_rot[i]))
            fail(ErrorKind::DegenerateGeometry, "non-finite curvature");
    return f;
}

ProfileFrame make_frame(const ProfileSurface& s, int order) {
    return make_frame(s.r_values(), s.z_values(), s.symmetry_rank(), s.topology(), order);
}

ArcDerivatives arc_derivatives(const ProfileFrame& f, std::span<const double> field, Parity parity) {
    const std::size_t n = f.size();
    ArcDerivatives d;
    d.ds.resize(n);
    d.dss.resize(n);
    discrete::diff(field, f.topology, parity, d.ds, d.dss, f.order);
    for (std::size_t i = 0; i < n; ++i) {
        const double L = f.speed[i];
        const double fu = d.ds[i];
        d.ds[i] = fu / L;
        d.dss[i] = (d.dss[i] - fu * f.speed_u[i] / L) / (L * L);
    }
    return d;
}

double over_r(const ProfileFrame& f, std::size_t i, double g, double g_s) {
    if (f.pole(i)) return g_s;
    return f.r_s(i) / f.r[i] * g;
}

namespace {

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) fail(ErrorKind::DegenerateGeometry, std::string("non-finite ") + what);
}

} // namespace

CurvatureField curvature(const ProfileFrame& f) {
    const std::size_t n = f.size();
    const double k = f.k;
    const double dim = k + 1.0;
    CurvatureField c;
    c.kappa_p = f.kappa_p;
    c.kappa_rot = f.kappa_rot;
    c.nu_r = f.nu_r;
    c.nu_z = f.nu_z;
    c.H.resize(n);
    c.normsqA.resize(n);
    c.normsqAo.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = f.kappa_p[i], b = f.kappa_rot[i];
        c.H[i] = a + k * b;
        c.normsqA[i] = a * a + k * b * b;
        c.normsqAo[i] = c.normsqA[i] - c.H[i] * c.H[i] / dim;
    }

    // Covariant derivatives of A = a N(x)N + b P in the frame adapted to the
    // rotation: N the unit meridian direction, P the projection onto the
    // orbit. With w = r_s / r the connection enters only through
    // grad_{e_a} N = w e_a.
    const auto da = arc_derivatives(f, f.kappa_p, Parity::Even);
    const auto db = arc_derivatives(f, f.kappa_rot, Parity::Even);
    const auto dH = arc_derivatives(f, c.H, Parity::Even);
    std::vector<double> diff_ab(n), wc(n), w2c(n), wa(n), wb(n);
    for (std::size_t i = 0; i < n; ++i) {
        diff_ab[i] = f.kappa_p[i] - f.kappa_rot[i];
    }
    const auto dc = arc_derivatives(f, diff_ab, Parity::Even);
    for (std::size_t i = 0; i < n; ++i) {
        wc[i] = f.pole(i) ? 0.0 : f.r_s(i) / f.r[i] * diff_ab[i];
        w2c[i] = f.pole(i) ? 0.5 * dc.dss[i] : wc[i] * f.r_s(i) / f.r[i];
        wa[i] = over_r(f, i, da.ds[i], da.dss[i]);
        wb[i] = over_r(f, i, db.ds[i], db.dss[i]);
    }
    std::vector<double> wc_u(n);
    discrete::diff1(wc, f.topology, Parity::Odd, wc_u, f.order);

    c.gradH.resize(n);
    c.normsqGradA.resize(n);
    c.normsqHessA.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double as = da.ds[i], bs = db.ds[i];
        c.gradH[i] = std::abs(dH.ds[i]);
        c.normsqGradA[i] = as * as + k * bs * bs + 2.0 * k * wc[i] * wc[i];

        const double wc_s = wc_u[i] / f.speed[i];
        const double t1 = wa[i] - 2.0 * w2c[i];
        const double t2 = wa[i] - wb[i] - w2c[i];
        c.normsqHessA[i] = da.dss[i] * da.dss[i] + k * db.dss[i] * db.dss[i] + 2.0 * k * wc_s * wc_s +
                           k * t1 * t1 + 2.0 * k * t2 * t2 + 2.0 * k * (k + 1.0) * w2c[i] * w2c[i] +
                           k * k * wb[i] * wb[i] + 4.0 * k * w2c[i] * wb[i];
    }
    require_finite(c.H, "mean curvature");
    require_finite(c.normsqHessA, "second derivative of A");
    return c;
}

CurvatureField curvature(const ProfileSurface& s) { return curvature(make_frame(s)); }

std::vector<double> laplace_beltrami(const ProfileFrame& f, std::span<const double> u) {
    if (u.size() != f.size()) fail(ErrorKind::BadParameter, "field size does not match profile");
    const auto d = arc_derivatives(f, u, Parity::Even);
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = d.dss[i] + f.k * over_r(f, i, d.ds[i], d.dss[i]);
    require_finite(out, "Laplacian");
    return out;
}

std::vector<double> laplace_beltrami(const ProfileSurface& s, std::span<const double> u) {
    return laplace_beltrami(make_frame(s), u);
}

std::vector<double> measure_weights(const ProfileFrame& f) {
    auto w = discrete::quadrature_weights(f.size(), f.topology);
    const double omega = sphere_measure(f.k);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] *= omega * std::pow(f.r[i], f.k) * f.speed[i];
    return w;
}

std::vector<double> measure_weights(const ProfileSurface& s) {
    const auto r = s.r_values();
    const auto z = s.z_values();
    const std::size_t n = r.size();
    std::vector<double> ru(n), zu(n);
    discrete::diff1(r, s.topology(), Parity::Odd, ru);
    discrete::diff1(z, s.topology(), Parity::Even, zu);
    auto w = discrete::quadrature_weights(n, s.topology());
    const double omega = sphere_measure(s.symmetry_rank());
    for (std::size_t i = 0; i < n; ++i)
        w[i] *= omega * std::pow(r[i], s.symmetry_rank()) * std::hypot(ru[i], zu[i]);
    return w;
}

double integrate(std::span<const double> weights, std::span<const double> phi) {
    if (weights.size() != phi.size()) fail(ErrorKind::BadParameter, "field size does not match profile");
    double sum = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) sum += weights[i] * phi[i];
    return sum;
}

double integrate(const ProfileSurface& s, std::span<const double> phi) {
    return integrate(measure_weights(s), phi);
}

namespace {

// Fraction of the k-sphere orbit {|(r cos t, r sin t ...)| } at (r, z) lying
// inside the ball.
double orbit_fraction(double r, double z, const BoundingBall& b, int k) {
    const double dz = z - b.z_c;
    const double rho2 = b.radius * b.radius;
    if (b.r_c == 0.0 || r == 0.0) {
        const double dr = r - b.r_c;
        return dr * dr + dz * dz < rho2 ? 1.0 : 0.0;
    }
    const double q = (r * r + b.r_c * b.r_c + dz * dz - rho2) / (2.0 * r * b.r_c);
    if (q <= -1.0) return 1.0;
    if (q >= 1.0) return 0.0;
    if (k == 1) return std::acos(q) / 3.14159265358979323846;
    return 0.5 * (1.0 - q);
}

} // namespace

std::vector<double> ball_fractions(const ProfileSurface& s, const BoundingBall& ball) {
    if (!(ball.radius > 0.0) || !(ball.r_c >= 0.0)) fail(ErrorKind::BadParameter, "invalid ball");
    constexpr int kHalfSamples = 8;
    const auto& nodes = s.nodes();
    const std::size_t n = nodes.size();
    const int k = s.symmetry_rank();
    const bool ring = s.topology() == Topology::Ring;
    std::vector<double> at(n);
    for (std::size_t i = 0; i < n; ++i) at[i] = orbit_fraction(nodes[i].r, nodes[i].z, ball, k);

    std::vector<double> frac(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool has_prev = ring || i > 0;
        const bool has_next = ring || i + 1 < n;
        const std::size_t ip = (i + n - 1) % n, in = (i + 1) % n;
        const bool uniform = (!has_prev || at[ip] == at[i]) && (!has_next || at[in] == at[i]) &&
                             (at[i] == 0.0 || at[i] == 1.0);
        if (uniform) {
            frac[i] = at[i];
            continue;
        }
        // Average over the dual cell [mid(i-1, i), mid(i, i+1)] along chords.
        double sum = 0.0;
        int count = 0;
        for (int side = 0; side < 2; ++side) {
            const bool present = side == 0 ? has_prev : has_next;
            if (!present) continue;
            const auto& q = nodes[side == 0 ? ip : in];
            for (int j = 0; j < kHalfSamples; ++j) {
                const double t = 0.5 * (j + 0.5) / kHalfSamples;
                sum += orbit_fraction(nodes[i].r + t * (q.r - nodes[i].r), nodes[i].z + t * (q.z - nodes[i].z),
                                      ball, k);
                ++count;
            }
        }
        frac[i] = sum / count;
    }
    return frac;
}

double ball_integral(std::span<const double> weights, std::span<const double> fractions,
                     std::span<const double> phi) {
    double sum = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) sum += weights[i] * fractions[i] * phi[i];
    return sum;
}

double ball_integral(const ProfileSurface& s, std::span<const double> phi, const BoundingBall& ball) {
    if (phi.size() != s.size()) fail(ErrorKind::BadParameter, "field size does not match profile");
    return ball_integral(measure_weights(s), ball_fractions(s, ball), phi);
}

} // namespace csdflow
