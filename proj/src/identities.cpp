#include "csdflow/identities.hpp"

#include "csdflow/curvature.hpp"
#include "csdflow/errors.hpp"

#include <algorithm>
#include <cmath>

namespace csdflow {

using discrete::Parity;

namespace {

// Accumulates a pointwise residual with one or two frame components.
class Accumulator {
public:
    Accumulator(std::string name, const ProfileFrame& f) : weights_(measure_weights(f)) {
        report_.name = std::move(name);
        report_.nodes = f.size();
    }

    void add(std::size_t i, double r1, double r2 = 0.0, double mult2 = 0.0) {
        report_.max = std::max({report_.max, std::abs(r1), std::abs(r2)});
        sum_ += weights_[i] * (r1 * r1 + mult2 * r2 * r2);
    }

    ResidualReport done() {
        report_.l2 = std::sqrt(std::max(0.0, sum_));
        return report_;
    }

private:
    std::vector<double> weights_;
    ResidualReport report_;
    double sum_ = 0.0;
};

} // namespace

ResidualReport simons_residual(const ProfileSurface& s, int order) {
    const auto f = make_frame(s, order);
    const auto c = curvature(f);
    const double k = f.k;
    const auto da = arc_derivatives(f, c.kappa_p, Parity::Even);
    const auto db = arc_derivatives(f, c.kappa_rot, Parity::Even);
    std::vector<double> diff_ab(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) diff_ab[i] = c.kappa_p[i] - c.kappa_rot[i];
    const auto dc = arc_derivatives(f, diff_ab, Parity::Even);
    Accumulator acc("simons", f);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double a = c.kappa_p[i], b = c.kappa_rot[i], H = c.H[i], A2 = c.normsqA[i];
        const double wa = over_r(f, i, da.ds[i], da.dss[i]);
        double w2c;
        if (f.pole(i)) {
            w2c = 0.5 * dc.dss[i];
        } else {
            const double w = f.r_s(i) / f.r[i];
            w2c = w * w * diff_ab[i];
        }
        // Both sides share second derivatives (H = a + k b); cancelling them
        // before differencing keeps round-off in the data from dominating.
        const double res_ss = -k * db.dss[i] + k * wa - 2.0 * k * w2c - (H * a * a - A2 * a);
        const double res_rot = db.dss[i] + 2.0 * w2c - wa - (H * b * b - A2 * b);
        acc.add(i, res_ss, res_rot, k);
    }
    return acc.done();
}

ResidualReport gauss_residual(const ProfileSurface& s, int order) {
    const auto f = make_frame(s, order);
    const std::size_t n = f.size();
    const double k = f.k;
    std::vector<double> rs(n), rss(n), rss_u(n), rsss(n);
    for (std::size_t i = 0; i < n; ++i) rs[i] = f.r_u[i] / f.speed[i];
    discrete::diff1(rs, f.topology, Parity::Even, rss_u, f.order);
    for (std::size_t i = 0; i < n; ++i) rss[i] = rss_u[i] / f.speed[i];
    discrete::diff1(rss, f.topology, Parity::Odd, rss_u, f.order);
    for (std::size_t i = 0; i < n; ++i) rsss[i] = rss_u[i] / f.speed[i];
    Accumulator acc("gauss", f);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = f.kappa_p[i], b = f.kappa_rot[i];
        const double H = a + k * b;
        const double extrinsic = H * H - (a * a + k * b * b);
        double R;
        if (f.pole(i)) {
            R = k == 1 ? -2.0 * rsss[i] / rs[i] : -6.0 * rsss[i] / rs[i];
        } else {
            R = -2.0 * k * rss[i] / f.r[i];
            if (f.k == 2) R += 2.0 * (1.0 - rs[i] * rs[i]) / (f.r[i] * f.r[i]);
        }
        acc.add(i, extrinsic - R);
    }
    return acc.done();
}

ResidualReport gauss_algebraic_residual(const ProfileSurface& s, int order) {
    const auto f = make_frame(s, order);
    const auto c = curvature(f);
    Accumulator acc("gauss_algebraic", f);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double a = c.kappa_p[i], b = c.kappa_rot[i];
        const double R = f.k == 1 ? 2.0 * a * b : 4.0 * a * b + 2.0 * b * b;
        acc.add(i, c.H[i] * c.H[i] - c.normsqA[i] - R);
    }
    return acc.done();
}

ResidualReport trace_residual(const ProfileSurface& s, int order) {
    const auto f = make_frame(s, order);
    const auto c = curvature(f);
    const double k = f.k, n = k + 1.0;
    Accumulator acc("trace", f);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double a = c.kappa_p[i], b = c.kappa_rot[i], H = c.H[i];
        const double trace = a + k * b - H;
        const double trace_o = (a - H / n) + k * (b - H / n);
        const double norm_o = (a - H / n) * (a - H / n) + k * (b - H / n) * (b - H / n) - c.normsqAo[i];
        acc.add(i, trace, std::max(std::abs(trace_o), std::abs(norm_o)), 1.0);
    }
    return acc.done();
}

ResidualReport codazzi_residual(const ProfileSurface& s, int order) {
    const auto f = make_frame(s, order);
    const auto db = arc_derivatives(f, f.kappa_rot, Parity::Even);
    Accumulator acc("codazzi", f);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double wc = f.pole(i) ? 0.0 : f.r_s(i) / f.r[i] * (f.kappa_p[i] - f.kappa_rot[i]);
        acc.add(i, db.ds[i] - wc);
    }
    return acc.done();
}

std::vector<ResidualReport> static_residuals(const ProfileSurface& s, int order) {
    return {simons_residual(s, order), gauss_residual(s, order), gauss_algebraic_residual(s, order),
            trace_residual(s, order), codazzi_residual(s, order)};
}

double convergence_order(double coarse, double fine, std::size_t n_coarse, std::size_t n_fine) {
    if (!(coarse > 0.0) || !(fine > 0.0) || n_fine <= n_coarse) return std::numeric_limits<double>::quiet_NaN();
    return std::log(coarse / fine) / std::log(double(n_fine) / double(n_coarse));
}

void attach_orders(const std::vector<ResidualReport>& coarse, std::vector<ResidualReport>& fine) {
    for (auto& f : fine)
        for (const auto& c : coarse)
            if (c.name == f.name) f.order = convergence_order(c.max, f.max, c.nodes, f.nodes);
}

namespace {

struct EvolutionFields {
    ProfileFrame f;
    CurvatureField c;
};

EvolutionFields fields_of(const Snapshot& s) {
    EvolutionFields e{make_frame(s.surface), {}};
    e.c = curvature(e.f);
    return e;
}

} // namespace

std::vector<ResidualReport> evolution_residuals(const Snapshot& a, const Snapshot& b, const Snapshot& c,
                                                const ConstraintFunction& h) {
    if (a.remesh_count != b.remesh_count || b.remesh_count != c.remesh_count)
        fail(ErrorKind::WindowInvalid, "remeshing occurred inside the window");
    const std::size_t n = b.surface.size();
    if (a.surface.size() != n || c.surface.size() != n)
        fail(ErrorKind::WindowInvalid, "node counts differ inside the window");
    const double tau = 0.5 * (c.t - a.t);
    if (!(tau > 0.0) || std::abs((b.t - a.t) - (c.t - b.t)) > 1e-9 * tau)
        fail(ErrorKind::WindowInvalid, "snapshots are not equally spaced in time");

    const auto A = fields_of(a), B = fields_of(b), C = fields_of(c);
    const auto& f = B.f;
    const double k = f.k, dim = k + 1.0;
    const double inv2t = 1.0 / (2.0 * tau);
    auto dt = [&](auto get) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = (get(C, i) - get(A, i)) * inv2t;
        return v;
    };

    const auto lapH = laplace_beltrami(f, B.c.H);
    std::vector<double> F(n);
    const double hb = evaluate(h, b.t);
    for (std::size_t i = 0; i < n; ++i) F[i] = lapH[i] + hb;
    const auto lapF = laplace_beltrami(f, F);
    std::vector<double> Fu(n), Fuu(n);
    discrete::diff(F, f.topology, Parity::Even, Fu, Fuu, f.order);

    auto g_uu = [](const EvolutionFields& e, std::size_t i) { return e.f.speed[i] * e.f.speed[i]; };
    auto g_tt = [](const EvolutionFields& e, std::size_t i) { return e.f.r[i] * e.f.r[i]; };
    auto A_uu = [&](const EvolutionFields& e, std::size_t i) { return e.c.kappa_p[i] * g_uu(e, i); };
    auto A_tt = [&](const EvolutionFields& e, std::size_t i) { return e.c.kappa_rot[i] * g_tt(e, i); };
    auto Ao_uu = [&](const EvolutionFields& e, std::size_t i) { return A_uu(e, i) - e.c.H[i] / dim * g_uu(e, i); };
    auto Ao_tt = [&](const EvolutionFields& e, std::size_t i) { return A_tt(e, i) - e.c.H[i] / dim * g_tt(e, i); };

    const auto dg_uu = dt(g_uu), dg_tt = dt(g_tt);
    const auto dmu = dt([&](const EvolutionFields& e, std::size_t i) { return e.f.speed[i] * std::pow(e.f.r[i], k); });
    const auto dnu_r = dt([](const EvolutionFields& e, std::size_t i) { return e.f.nu_r[i]; });
    const auto dnu_z = dt([](const EvolutionFields& e, std::size_t i) { return e.f.nu_z[i]; });
    const auto dH = dt([](const EvolutionFields& e, std::size_t i) { return e.c.H[i]; });
    const auto dA_uu = dt(A_uu), dA_tt = dt(A_tt);
    const auto dAo_uu = dt(Ao_uu), dAo_tt = dt(Ao_tt);

    Accumulator metric("metric", f), measure("measure", f), normal("normal", f), mean("mean_curvature", f),
        second("second_form", f), tracefree("tracefree_form", f);
    for (std::size_t i = 0; i < n; ++i) {
        const double L = f.speed[i], L2 = L * L, r = f.r[i], r2 = r * r;
        const double kp = B.c.kappa_p[i], kr = B.c.kappa_rot[i], H = B.c.H[i];
        const double rhs_g_uu = 2.0 * F[i] * kp * L2;
        const double rhs_g_tt = 2.0 * F[i] * kr * r2;
        metric.add(i, dg_uu[i] - rhs_g_uu, dg_tt[i] - rhs_g_tt, k);

        measure.add(i, dmu[i] - H * F[i] * L * std::pow(r, k));

        const double grad = Fu[i] / L2;
        normal.add(i, dnu_r[i] + grad * f.r_u[i], dnu_z[i] + grad * f.z_u[i], 1.0);

        const double rhs_H = -lapF[i] - F[i] * B.c.normsqA[i];
        mean.add(i, dH[i] - rhs_H);

        const double hess_uu = Fuu[i] - f.speed_u[i] / L * Fu[i];
        const double hess_tt = r * f.r_u[i] / L2 * Fu[i];
        const double rhs_A_uu = -hess_uu + F[i] * kp * kp * L2;
        const double rhs_A_tt = -hess_tt + F[i] * kr * kr * r2;
        second.add(i, dA_uu[i] - rhs_A_uu, dA_tt[i] - rhs_A_tt, k);

        const double rhs_Ao_uu = rhs_A_uu - rhs_H / dim * L2 - H / dim * rhs_g_uu;
        const double rhs_Ao_tt = rhs_A_tt - rhs_H / dim * r2 - H / dim * rhs_g_tt;
        tracefree.add(i, dAo_uu[i] - rhs_Ao_uu, dAo_tt[i] - rhs_Ao_tt, k);
    }
    std::vector<ResidualReport> out{metric.done(), measure.done(), normal.done(),
                                    mean.done(),   second.done(),  tracefree.done()};
    for (auto& r : out) r.dt = tau;
    return out;
}

EvolutionStudy evolution_study(const ProfileSurface& s0, const ConstraintFunction& h, double tau, double fixed_dt) {
    if (!(tau > 0.0) || !(fixed_dt > 0.0) || fixed_dt > 0.5 * tau)
        fail(ErrorKind::BadParameter, "evolution study needs 0 < fixed_dt <= tau / 2");
    FlowConfig cfg;
    cfg.remesh_every = 0;
    cfg.fixed_dt = fixed_dt;
    cfg.snapshot_every = 0.5 * tau;
    cfg.t_end = 2.0 * tau;
    cfg.stop_normsqA_max = std::numeric_limits<double>::max();
    const auto traj = evolve(s0, h, cfg);
    if (traj.termination != Termination::ReachedTEnd)
        fail(ErrorKind::WindowInvalid, "evolution window terminated early: " + to_string(traj.termination));
    auto at = [&](double t) -> const Snapshot& {
        const Snapshot* best = &traj.snapshots.front();
        for (const auto& s : traj.snapshots)
            if (std::abs(s.t - t) < std::abs(best->t - t)) best = &s;
        if (std::abs(best->t - t) > 1e-9 * tau) fail(ErrorKind::WindowInvalid, "missing window snapshot");
        return *best;
    };
    EvolutionStudy st;
    st.coarse = evolution_residuals(at(0.0), at(tau), at(2.0 * tau), h);
    st.fine = evolution_residuals(at(0.5 * tau), at(tau), at(1.5 * tau), h);
    for (std::size_t j = 0; j < st.coarse.size(); ++j) {
        const double c = st.coarse[j].max, f = st.fine[j].max;
        st.ratio.push_back(f > 0.0 ? c / f : std::numeric_limits<double>::infinity());
        st.converges.push_back(st.ratio.back() >= 3.5);
        st.dt_exact.push_back(std::abs(c - f) <= 0.05 * std::max(c, f));
    }
    return st;
}

ScaleInvarianceReport scale_invariance_check(const ProfileSurface& s, double lambda, int m) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(ErrorKind::BadParameter, "lambda must be positive");
    if (m < 1) fail(ErrorKind::BadParameter, "exponent must be positive");
    auto value = [m](const ProfileSurface& p) {
        const auto c = curvature(p);
        std::vector<double> phi(c.size());
        for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = std::pow(c.normsqA[i], 0.5 * m);
        return integrate(measure_weights(p), phi);
    };
    ScaleInvarianceReport r;
    r.m = m;
    r.lambda = lambda;
    r.value = value(s);
    r.scaled_value = value(rescale(s, lambda));
    r.ratio = r.scaled_value / r.value;
    r.expected = std::pow(lambda, s.dimension() - m);
    r.relative_error = std::abs(r.ratio - r.expected) / r.expected;
    return r;
}

} // namespace csdflow
