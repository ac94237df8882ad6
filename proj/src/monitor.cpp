#include "csdflow/monitor.hpp"

#include "csdflow/errors.hpp"
#include "csdflow/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace csdflow {

namespace {

void check_exponent(int m, int n) {
    if (m != 2 && m != n) fail(ErrorKind::BadParameter, "exponent m must be 2 or n");
}

std::vector<double> power_field(const CurvatureField& c, int m) {
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = m == 2 ? c.normsqA[i] : std::pow(c.normsqA[i], 0.5 * m);
    return out;
}

ConcentrationValue sup_over(const ProfileSurface& s, std::span<const double> weights, std::span<const double> phi,
                            const std::vector<Center>& centers, double rho) {
    if (!(rho > 0.0) || !std::isfinite(rho)) fail(ErrorKind::BadParameter, "rho must be positive");
    if (centers.empty()) fail(ErrorKind::BadParameter, "empty center set");
    std::vector<double> values(centers.size());
    parallel_for(centers.size(), [&](std::size_t j) {
        const auto ball = make_ball(centers[j].r, centers[j].z, rho);
        values[j] = ball_integral(weights, ball_fractions(s, ball), phi);
    });
    std::size_t best = 0;
    for (std::size_t j = 1; j < values.size(); ++j)
        if (values[j] > values[best]) best = j;
    return {values[best], centers[best]};
}

} // namespace

std::vector<Center> concentration_centers(const ProfileSurface& s, CenterSet set) {
    constexpr int kSub = 4;
    const auto& nodes = s.nodes();
    std::vector<Center> out;
    out.reserve(kSub * nodes.size());
    const std::size_t segs = s.segments();
    for (std::size_t i = 0; i < segs; ++i) {
        const auto& a = nodes[i];
        const auto& b = nodes[(i + 1) % nodes.size()];
        for (int j = 0; j < kSub; ++j) {
            const double t = double(j) / kSub;
            out.push_back({std::max(0.0, a.r + t * (b.r - a.r)), a.z + t * (b.z - a.z)});
        }
    }
    if (s.topology() == Topology::PoleToPole) out.push_back({std::max(0.0, nodes.back().r), nodes.back().z});
    if (set == CenterSet::SurfaceAndAxis) {
        double zlo = nodes[0].z, zhi = nodes[0].z;
        for (const auto& p : nodes) {
            zlo = std::min(zlo, p.z);
            zhi = std::max(zhi, p.z);
        }
        const double step = s.spacing() / kSub;
        const auto count = static_cast<std::size_t>(std::ceil((zhi - zlo) / step));
        for (std::size_t j = 0; j <= count; ++j)
            out.push_back({0.0, count == 0 ? zlo : zlo + (zhi - zlo) * double(j) / double(count)});
    }
    return out;
}

ConcentrationValue concentration(const ProfileSurface& s, const CurvatureField& c, double rho, int m,
                                 const std::vector<Center>& centers) {
    check_exponent(m, s.dimension());
    const auto w = measure_weights(s);
    const auto phi = power_field(c, m);
    return sup_over(s, w, phi, centers, rho);
}

ConcentrationValue concentration(const ProfileSurface& s, double rho, int m, CenterSet set) {
    return concentration(s, curvature(s), rho, m, concentration_centers(s, set));
}

double choose_rho(const ProfileSurface& s, double eps0, int m, CenterSet set) {
    if (!(eps0 > 0.0)) fail(ErrorKind::BadParameter, "eps0 must be positive");
    check_exponent(m, s.dimension());
    const auto c = curvature(s);
    const auto centers = concentration_centers(s, set);
    const auto w = measure_weights(s);
    const auto phi = power_field(c, m);
    const double D = diameter(s);
    if (sup_over(s, w, phi, centers, D).value <= eps0) return D;
    double lo = 0.0, hi = D;
    while (hi - lo > 0.01 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (sup_over(s, w, phi, centers, mid).value <= eps0)
            lo = mid;
        else
            hi = mid;
    }
    return lo > 0.0 ? lo : hi;
}

double covering_constant(int n) { return std::pow(4.0, n + 1); }

EtaSample eta_at(const Snapshot& snap, double rho, int m) {
    const auto& s = snap.surface;
    check_exponent(m, s.dimension());
    const auto centers = concentration_centers(s);
    const auto w = measure_weights(s);
    const auto phi = power_field(snap.field, m);
    EtaSample e;
    e.t = snap.t;
    const auto full = sup_over(s, w, phi, centers, rho);
    e.eta = full.value;
    e.argmax = full.argmax;
    e.half_radius = sup_over(s, w, phi, centers, 0.5 * rho).value;
    e.covering_ok = e.eta <= covering_constant(s.dimension()) * e.half_radius * (1.0 + 1e-12) + 1e-300;
    return e;
}

ConcentrationReport track(const FlowTrajectory& traj, double rho, int m, double eps0) {
    if (traj.snapshots.empty()) fail(ErrorKind::TooFewSnapshots, "trajectory has no snapshots");
    const auto& s0 = traj.snapshots.front().surface;
    const int n = s0.dimension();
    check_exponent(m, n);
    ConcentrationReport rep;
    rep.m = m;
    rep.rho = rho;
    rep.c_eta = covering_constant(n);
    rep.center_grid = "nodes+chord quarter points, axis at spacing/4";
    {
        const auto centers = concentration_centers(s0);
        const auto w = measure_weights(s0);
        const auto phi = power_field(traj.snapshots.front().field, m);
        rep.eps_map.resize(centers.size());
        parallel_for(centers.size(), [&](std::size_t j) {
            const auto ball = make_ball(centers[j].r, centers[j].z, rho);
            rep.eps_map[j] = {centers[j], ball_integral(w, ball_fractions(s0, ball), phi)};
        });
    }
    for (const auto& snap : traj.snapshots) rep.eta_series.push_back(eta_at(snap, rho, m));
    rep.eps0 = eps0 > 0.0 ? eps0 : rep.eta_series.front().eta;
    const double base = std::max(rep.eps0, rep.eta_series.front().eta);
    for (auto& e : rep.eta_series) e.c_emp = base > 0.0 ? e.eta / base : 0.0;
    apply_lifespan_fit(rep, std::numeric_limits<double>::quiet_NaN());
    return rep;
}

void apply_lifespan_fit(ConcentrationReport& rep, double c_fit) {
    rep.c_fit = c_fit;
    rep.lifespan_bound = c_fit > 0.0 ? std::pow(rep.rho, 4) / c_fit : std::numeric_limits<double>::quiet_NaN();
    const double limit = 3.0 * rep.c_eta * rep.eps0;
    rep.window_below_threshold = true;
    for (const auto& e : rep.eta_series) {
        if (std::isfinite(rep.lifespan_bound) && e.t > rep.lifespan_bound) break;
        if (e.eta > limit) rep.window_below_threshold = false;
    }
}

LifespanFit fit_lifespan_constant(const std::vector<std::pair<double, double>>& experiments) {
    if (experiments.size() < 2) fail(ErrorKind::TooFewExperiments, "need at least two experiments");
    LifespanFit fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [rho, T] : experiments) {
        if (!(rho > 0.0) || !(T > 0.0) || !std::isfinite(rho) || !std::isfinite(T))
            fail(ErrorKind::BadParameter, "experiments need positive finite rho and T");
        fit.c_fit = std::max(fit.c_fit, std::pow(rho, 4) / T);
        const double x = std::log(rho), y = std::log(T);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = double(experiments.size());
    const double den = m * sxx - sx * sx;
    if (!(std::abs(den) > 0.0)) fail(ErrorKind::TooFewExperiments, "experiments need distinct rho");
    fit.slope = (m * sxy - sx * sy) / den;
    fit.intercept = (sy - fit.slope * sx) / m;
    return fit;
}

// psi(t) = 1 - S(2t - 1) with S(u) = 6u^5 - 15u^4 + 10u^3.
double cutoff_profile(double t) {
    if (t <= 0.5) return 1.0;
    if (t >= 1.0) return 0.0;
    const double u = 2.0 * t - 1.0;
    return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double cutoff_profile_d1(double t) {
    if (t <= 0.5 || t >= 1.0) return 0.0;
    const double u = 2.0 * t - 1.0;
    return -60.0 * u * u * (1.0 - u) * (1.0 - u);
}

double cutoff_profile_d2(double t) {
    if (t <= 0.5 || t >= 1.0) return 0.0;
    const double u = 2.0 * t - 1.0;
    return -240.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
}

CutoffFn cutoff(double z_center, double rho, int s, int n) {
    if (!(rho > 0.0) || !std::isfinite(rho)) fail(ErrorKind::BadParameter, "cutoff radius must be positive");
    if (s < 4) fail(ErrorKind::BadParameter, "cutoff exponent s must be >= 4");
    if (!std::isfinite(z_center)) fail(ErrorKind::BadParameter, "cutoff center must be finite");
    CutoffFn g;
    g.z_center = z_center;
    g.rho = rho;
    g.s = s;
    // max |psi'| = 15/4, max |psi''| = 40/sqrt(3), max |psi'(t)| / t <= 15/2.
    g.c_gamma1 = 3.75 / rho;
    const double second = (40.0 / std::sqrt(3.0) + 7.5 * std::sqrt(double(n))) / (rho * rho);
    g.c_gamma2 = std::max(second, g.c_gamma1);
    return g;
}

namespace {

std::vector<double> gamma_values(const ProfileSurface& s, const CutoffFn& g) {
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double dz = s[i].z - g.z_center;
        out[i] = cutoff_profile(std::hypot(s[i].r, dz) / g.rho);
    }
    return out;
}

BoundingBall support_ball(const CutoffFn& g) { return make_ball(0.0, g.z_center, g.rho); }
BoundingBall core_ball(const CutoffFn& g) { return make_ball(0.0, g.z_center, 0.5 * g.rho); }

} // namespace

CutoffEvaluation evaluate_cutoff(const ProfileSurface& s, const CutoffFn& g) {
    const auto f = make_frame(s);
    const auto c = curvature(f);
    CutoffEvaluation e;
    e.gamma = gamma_values(s, g);
    const auto d = arc_derivatives(f, e.gamma, discrete::Parity::Even);
    e.grad.resize(s.size());
    e.hess.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double wg = over_r(f, i, d.ds[i], d.dss[i]);
        e.grad[i] = std::abs(d.ds[i]);
        e.hess[i] = std::sqrt(d.dss[i] * d.dss[i] + f.k * wg * wg);
        const double gr = e.grad[i] / g.c_gamma1;
        const double hr = e.hess[i] / (g.c_gamma2 * (1.0 + std::sqrt(c.normsqA[i])));
        e.worst_grad_ratio = std::max(e.worst_grad_ratio, gr);
        e.worst_hess_ratio = std::max(e.worst_hess_ratio, hr);
    }
    e.grad_ok = e.worst_grad_ratio <= 1.05;
    e.hess_ok = e.worst_hess_ratio <= 1.05;
    return e;
}

std::vector<KeyEstimateRow> keyest1_functional(const FlowTrajectory& traj, const CutoffFn& g) {
    if (traj.snapshots.empty()) fail(ErrorKind::TooFewSnapshots, "trajectory has no snapshots");
    const int n = traj.snapshots.front().surface.dimension();
    std::vector<KeyEstimateRow> rows;
    std::vector<double> integrand;
    double eps = 0.0;
    for (const auto& snap : traj.snapshots) {
        const auto& s = snap.surface;
        const auto& c = snap.field;
        const auto w = measure_weights(s);
        const auto core = ball_fractions(s, core_ball(g));
        const auto support = ball_fractions(s, support_ball(g));
        std::vector<double> dens(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double a2 = c.normsqA[i];
            dens[i] = c.normsqHessA[i] + a2 * c.normsqGradA[i] + a2 * a2 * a2;
        }
        KeyEstimateRow row;
        row.t = snap.t;
        row.lhs = ball_integral(w, core, c.normsqA);
        integrand.push_back(ball_integral(w, core, dens));
        eps = std::max(eps, ball_integral(w, support, power_field(c, n)));
        if (rows.empty()) {
            row.initial = ball_integral(w, support, c.normsqA);
        } else {
            const auto& prev = rows.back();
            row.initial = prev.initial;
            const std::size_t j = integrand.size() - 1;
            row.time_term = prev.time_term + 0.5 * (row.t - prev.t) * (integrand[j] + integrand[j - 1]);
        }
        row.lhs += row.time_term;
        rows.push_back(row);
    }
    for (auto& row : rows) {
        row.eps = eps;
        const double den = (row.t + (n - 2) * std::exp(row.t)) * std::pow(eps, 2.0 / n);
        const double num = row.lhs - (1.0 + (n - 2) * row.t) * row.initial;
        row.c_emp = den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
    }
    return rows;
}

namespace {

AuditRecord finish(std::string name, double lhs, double rhs) {
    AuditRecord r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs_structure = rhs;
    if (lhs == 0.0 && rhs == 0.0) {
        r.vacuous = true;
        r.c_emp = 0.0;
    } else {
        r.c_emp = lhs / rhs;
    }
    r.finite = std::isfinite(r.c_emp);
    return r;
}

} // namespace

AuditRecord audit_ms1(const ProfileSurface& s, const CutoffFn& g) {
    const auto c = curvature(s);
    const auto w = measure_weights(s);
    const auto gam = gamma_values(s, g);
    const auto support = ball_fractions(s, support_ball(g));
    const int n = s.dimension();
    double lhs = 0.0, hess_w = 0.0, mixed_w = 0.0, A2 = 0.0, An = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double a2 = c.normsqA[i];
        const double gs = std::pow(gam[i], g.s) * w[i];
        lhs += gs * (a2 * a2 * a2 + a2 * c.normsqGradA[i]);
        hess_w += gs * c.normsqHessA[i];
        mixed_w += gs * (c.normsqHessA[i] + a2 * a2 * a2);
        A2 += support[i] * w[i] * a2;
        An += support[i] * w[i] * std::pow(a2, 0.5 * n);
    }
    double rhs;
    if (n == 2) {
        rhs = A2 * mixed_w + std::pow(g.c_gamma1, 4) * A2 * A2;
    } else {
        // theta = 1; ||A||_3 = An^(1/3).
        rhs = hess_w + std::sqrt(An) * mixed_w + std::pow(g.c_gamma1, 3) * (An + std::pow(An, 1.5));
    }
    return finish("MS1", lhs, rhs);
}

AuditRecord audit_ms2(const ProfileSurface& s, const CutoffFn& g, AuditField field) {
    const auto f = make_frame(s);
    const auto c = curvature(f);
    const auto w = measure_weights(f);
    const auto support = ball_fractions(s, support_ball(g));
    const int n = s.dimension();
    std::vector<double> T2(s.size()), hess2(s.size());
    if (field == AuditField::A) {
        T2 = c.normsqA;
        hess2 = c.normsqHessA;
    } else {
        const auto d = arc_derivatives(f, c.H, discrete::Parity::Even);
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double wh = over_r(f, i, d.ds[i], d.dss[i]);
            T2[i] = c.H[i] * c.H[i];
            hess2[i] = d.dss[i] * d.dss[i] + f.k * wh * wh;
        }
    }
    double sup = 0.0, T_l2 = 0.0, hess_l2 = 0.0, TA2_l2 = 0.0;
    const double core = 0.5 * g.rho;
    auto dist = [&](std::size_t i) { return std::hypot(s[i].r, s[i].z - g.z_center); };
    const std::size_t segs = s.topology() == Topology::Ring ? s.size() : s.size() - 1;
    for (std::size_t i = 0; i < segs; ++i) {
        // Where a chord crosses the core sphere, interpolate |T|^2 there so the
        // sup does not jump as nodes enter or leave the core.
        const std::size_t j = i + 1 == s.size() ? 0 : i + 1;
        const double di = dist(i), dj = dist(j);
        if ((di <= core) == (dj <= core)) continue;
        const double pr = s[j].r - s[i].r, pz = s[j].z - s[i].z;
        const double qr = s[i].r, qz = s[i].z - g.z_center;
        const double a = pr * pr + pz * pz, b = 2.0 * (pr * qr + pz * qz), cc = qr * qr + qz * qz - core * core;
        const double disc = std::sqrt(std::max(0.0, b * b - 4.0 * a * cc));
        for (double th : {(-b - disc) / (2.0 * a), (-b + disc) / (2.0 * a)}) {
            if (!(th >= 0.0 && th <= 1.0)) continue;
            const double v = (1.0 - th) * T2[i] + th * T2[j];
            sup = std::max(sup, v * v);
        }
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (dist(i) <= core) sup = std::max(sup, T2[i] * T2[i]);
        const double wi = support[i] * w[i];
        T_l2 += wi * T2[i];
        hess_l2 += wi * hess2[i];
        TA2_l2 += wi * T2[i] * c.normsqA[i] * c.normsqA[i];
    }
    // ||X||_2^p = (int |X|^2)^(p/2).
    const double half = 0.5;
    const double rhs = std::pow(T_l2, half * (4 - n)) *
                       (std::pow(hess_l2, half * n) + std::pow(TA2_l2, half * n) + std::pow(T_l2, half * n));
    return finish(field == AuditField::A ? "MS2[A]" : "MS2[H]", sup, rhs);
}

} // namespace csdflow
