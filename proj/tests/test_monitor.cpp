#include "csdflow/monitor.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace csdflow;
using std::numbers::pi;
using testing::kind_of;

namespace {

ProfileSurface make(const std::string& p, int n, int k = 1) { return preset(parse_preset(p), k, n); }

FlowConfig cfg(double t_end, double every) {
    FlowConfig c;
    c.t_end = t_end;
    c.snapshot_every = every;
    return c;
}

const char* const kPresets[] = {"sphere:1", "perturbed_sphere:1,0.05,3", "torus:2,1", "dumbbell:0.15,6", "lens:0.5"};

} // namespace

TEST_CASE("concentration on the unit sphere") {
    const auto s = make("sphere:1", 256);
    const auto whole = concentration(s, 3.0, 2);
    CHECK(whole.value == doctest::Approx(8 * pi).epsilon(1e-8));

    // Unit ball centred on the surface cuts a cap of height 1/2: area pi, and
    // |A|^2 = 2 there.
    CHECK(concentration(s, 1.0, 2, CenterSet::Surface).value == doctest::Approx(2 * pi).epsilon(1e-3));
    // With axis centres the best ball sits at the origin, its boundary on the
    // sphere, and holds half of it.
    const auto axis = concentration(s, 1.0, 2);
    CHECK(axis.value == doctest::Approx(4 * pi).epsilon(1e-2));

    CHECK(kind_of([&] { concentration(s, 0.0, 2); }) == ErrorKind::BadParameter);
    CHECK(kind_of([&] { concentration(s, 1.0, 3); }) == ErrorKind::BadParameter);
    CHECK_NOTHROW(concentration(make("sphere:1", 64, 2), 1.0, 3));
}

TEST_CASE("concentration is monotone in rho and vanishes with it") {
    for (const char* p : kPresets) {
        const auto s = make(p, 128);
        INFO(std::string(p));
        double prev = INFINITY;
        for (double rho = 4.0; rho > 1e-3; rho *= 0.7) {
            const double v = concentration(s, rho, 2).value;
            CHECK(v <= prev * (1.0 + 1e-14));
            prev = v;
        }
        CHECK(prev <= 1e-3 * concentration(s, 4.0, 2).value);
    }
}

TEST_CASE("concentration with m = n is scale invariant") {
    for (int k : {1, 2}) {
        for (const char* p : kPresets) {
            const auto s = make(p, 128, k);
            const int n = k + 1;
            for (double lambda : {0.5, 3.0}) {
                for (double rho : {0.3, 1.0}) {
                    const double a = concentration(s, rho, n).value;
                    const double b = concentration(rescale(s, lambda), lambda * rho, n).value;
                    INFO(std::string(p), " k=", k, " lambda=", lambda, " rho=", rho);
                    CHECK(std::abs(b - a) <= 1e-10 * a);
                }
            }
        }
    }
}

TEST_CASE("choose_rho") {
    const auto s = make("sphere:1", 256);
    CHECK(choose_rho(s, 8 * pi + 1, 2) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(choose_rho(s, 2 * pi, 2, CenterSet::Surface) == doctest::Approx(1.0).epsilon(0.02));
    const double r = choose_rho(s, 2 * pi, 2);
    CHECK(concentration(s, r, 2).value <= 2 * pi);
    CHECK(concentration(s, 1.02 * r, 2).value > 2 * pi);
    double prev = INFINITY;
    for (double eps0 : {1.0, 1e-1, 1e-2, 1e-3}) {
        const double v = choose_rho(s, eps0, 2);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(prev < 0.05);
    CHECK(kind_of([&] { choose_rho(s, 0.0, 2); }) == ErrorKind::BadParameter);
}

TEST_CASE("covering constant") {
    CHECK(covering_constant(2) == 64.0);
    CHECK(covering_constant(3) == 256.0);
}

TEST_CASE("covering bound on static presets") {
    for (int k : {1, 2}) {
        for (const char* p : kPresets) {
            Snapshot snap;
            snap.surface = make(p, 128, k);
            snap.field = curvature(snap.surface);
            for (double rho : {0.05, 0.2, 1.0, 5.0}) {
                for (int m : {2, k + 1}) {
                    const auto e = eta_at(snap, rho, m);
                    INFO(std::string(p), " k=", k, " rho=", rho, " m=", m);
                    CHECK(e.covering_ok);
                    CHECK(e.half_radius <= e.eta * (1.0 + 1e-14));
                }
            }
        }
    }
}

TEST_CASE("track on the stationary sphere") {
    const auto tr = evolve(make("sphere:1", 64), ConstraintFunction::zero(), cfg(1e-3, 1e-4));
    const auto rep = track(tr, 0.5, 2);
    REQUIRE(rep.eta_series.size() == tr.snapshots.size());
    CHECK(rep.c_eta == 64.0);
    CHECK(rep.eps0 == rep.eta_series.front().eta);
    CHECK(rep.eps_map.size() == concentration_centers(tr.snapshots.front().surface).size());
    const double eta0 = rep.eta_series.front().eta;
    for (const auto& e : rep.eta_series) {
        CHECK(std::abs(e.eta - eta0) <= 1e-6 * eta0);
        CHECK(e.covering_ok);
        CHECK(e.c_emp == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK(rep.window_below_threshold);
    CHECK(kind_of([] { track(FlowTrajectory{}, 0.5, 2); }) == ErrorKind::TooFewSnapshots);
}

TEST_CASE("track follows the quartic rescaling") {
    const auto s = make("perturbed_sphere:1,0.05,3", 64);
    const auto base = evolve(s, ConstraintFunction::zero(), cfg(1e-3, 2e-4));
    const auto rb = track(base, 0.4, 2 /* = n */);
    for (double lambda : {0.5, 3.0}) {
        const double l4 = std::pow(lambda, 4);
        FlowConfig c = cfg(1e-3 * l4, 2e-4 * l4);
        c.dt_floor *= l4;
        const auto tr = evolve(rescale(s, lambda), ConstraintFunction::zero(), c);
        const auto r = track(tr, 0.4 * lambda, 2);
        REQUIRE(r.eta_series.size() == rb.eta_series.size());
        for (std::size_t i = 0; i < r.eta_series.size(); ++i) {
            INFO("lambda=", lambda, " snapshot ", i);
            CHECK(r.eta_series[i].t == doctest::Approx(l4 * rb.eta_series[i].t).epsilon(1e-12));
            CHECK(std::abs(r.eta_series[i].eta - rb.eta_series[i].eta) <= 1e-10 * rb.eta_series[i].eta);
        }
    }
}

TEST_CASE("eta grows into the dumbbell neck") {
    const auto tr = evolve(make("dumbbell:0.15,6", 128), ConstraintFunction::zero(), cfg(1.0, 2e-5));
    REQUIRE(tr.termination == Termination::SingularityDetected);
    const auto rep = track(tr, 0.1, 2);
    const std::size_t n = rep.eta_series.size();
    REQUIRE(n >= 10);
    for (std::size_t i = n - n / 5; i < n; ++i) CHECK(rep.eta_series[i].eta > rep.eta_series[i - 1].eta);
    CHECK(std::abs(rep.eta_series.back().argmax.z) <= 0.1);
    for (const auto& e : rep.eta_series) CHECK(e.covering_ok);
}

TEST_CASE("lifespan fit") {
    auto fit = fit_lifespan_constant({{1, 1}, {2, 16}, {3, 81}});
    CHECK(fit.slope == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(fit.c_fit == doctest::Approx(1.0).epsilon(1e-12));
    fit = fit_lifespan_constant({{1, 0.5}, {2, 8}});
    CHECK(fit.c_fit == doctest::Approx(2.0).epsilon(1e-12));

    const std::vector<std::pair<double, double>> corpus{{0.5, 0.01}, {0.8, 0.2}, {1.1, 0.3}, {1.4, 2.0}};
    fit = fit_lifespan_constant(corpus);
    for (const auto& [rho, T] : corpus) CHECK(T >= std::pow(rho, 4) / fit.c_fit * (1.0 - 1e-14));

    CHECK(kind_of([] { fit_lifespan_constant({{1, 1}}); }) == ErrorKind::TooFewExperiments);
    CHECK(kind_of([] { fit_lifespan_constant({{1, 1}, {1, 2}}); }) == ErrorKind::TooFewExperiments);
    CHECK(kind_of([] { fit_lifespan_constant({{1, 1}, {2, NAN}}); }) == ErrorKind::BadParameter);

    ConcentrationReport rep;
    rep.rho = 2.0;
    rep.c_eta = 64.0;
    rep.eps0 = 1.0;
    rep.eta_series = {{0.0, 1.0}, {1.0, 100.0}, {3.0, 1000.0}};
    apply_lifespan_fit(rep, 8.0);
    CHECK(rep.lifespan_bound == 2.0);
    CHECK(rep.window_below_threshold);
    apply_lifespan_fit(rep, 4.0);
    CHECK(!rep.window_below_threshold);
}

TEST_CASE("cutoff profile") {
    CHECK(cutoff_profile(0.0) == 1.0);
    CHECK(cutoff_profile(0.5) == 1.0);
    CHECK(cutoff_profile(1.0) == 0.0);
    CHECK(cutoff_profile(2.0) == 0.0);
    double max_d1 = 0.0, max_d2 = 0.0;
    for (int i = 0; i <= 100000; ++i) {
        const double t = i / 100000.0 * 1.2;
        const double v = cutoff_profile(t);
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
        max_d1 = std::max(max_d1, std::abs(cutoff_profile_d1(t)));
        max_d2 = std::max(max_d2, std::abs(cutoff_profile_d2(t)));
        if (t > 0.01 && t < 1.19) {
            const double h = 1e-5;
            REQUIRE(cutoff_profile_d1(t) ==
                    doctest::Approx((cutoff_profile(t + h) - cutoff_profile(t - h)) / (2 * h)).epsilon(1e-6).scale(1));
        }
    }
    CHECK(max_d1 == doctest::Approx(3.75).epsilon(1e-6));
    CHECK(max_d2 == doctest::Approx(40.0 / std::sqrt(3.0)).epsilon(1e-6));

    for (double rho : {0.25, 1.0, 7.0}) {
        const auto g = cutoff(0.0, rho, 4, 2);
        CHECK(g.c_gamma1 * rho == doctest::Approx(3.75));
        CHECK(g.c_gamma2 * rho * rho == doctest::Approx(cutoff(0.0, 1.0, 4, 2).c_gamma2));
    }
    CHECK(kind_of([] { cutoff(0.0, 1.0, 3, 2); }) == ErrorKind::BadParameter);
    CHECK(kind_of([] { cutoff(0.0, 0.0, 4, 2); }) == ErrorKind::BadParameter);
}

TEST_CASE("cutoff on the sphere from the north pole") {
    const auto s = make("sphere:1", 256);
    const auto g = cutoff(1.0, 1.0, 4, 2);
    const auto ev = evaluate_cutoff(s, g);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double d = std::hypot(s[i].r, s[i].z - 1.0);
        if (d <= 0.5) CHECK(ev.gamma[i] == 1.0);
        if (d >= 1.0) CHECK(ev.gamma[i] == 0.0);
    }
    CHECK(ev.grad_ok);
    CHECK(ev.hess_ok);
    CHECK(ev.worst_grad_ratio <= 1.0);
    CHECK(ev.worst_grad_ratio > 0.5);
}

TEST_CASE("cutoff bounds hold on smooth presets") {
    for (int k : {1, 2}) {
        for (const char* p : kPresets) {
            const auto s = make(p, 256, k);
            double zlo = INFINITY, zhi = -INFINITY;
            for (const auto& q : s.nodes()) {
                zlo = std::min(zlo, q.z);
                zhi = std::max(zhi, q.z);
            }
            for (double f : {0.0, 0.3, 0.5, 1.0}) {
                for (double rho : {0.3, 1.0, 3.0}) {
                    const auto ev = evaluate_cutoff(s, cutoff(zlo + f * (zhi - zlo), rho, 4, k + 1));
                    INFO(std::string(p), " k=", k, " f=", f, " rho=", rho);
                    CHECK(ev.grad_ok);
                    CHECK(ev.hess_ok);
                }
            }
        }
    }
}

TEST_CASE("key estimate functional") {
    const auto tr = evolve(make("sphere:1", 64), ConstraintFunction::zero(), cfg(0.01, 1e-3));
    const auto g = cutoff(0.0, 3.0, 4, 2);
    const auto rows = keyest1_functional(tr, g);
    REQUIRE(rows.size() == tr.snapshots.size());
    CHECK(rows.front().lhs == doctest::Approx(8 * pi).epsilon(1e-6));
    CHECK(rows.front().initial == doctest::Approx(8 * pi).epsilon(1e-6));
    CHECK(rows.back().eps == doctest::Approx(8 * pi).epsilon(1e-6));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        // Only |A|^6 = 8 survives: the time term is 32 pi t and c_emp = 4.
        CHECK(rows[i].time_term == doctest::Approx(32 * pi * rows[i].t).epsilon(1e-6));
        CHECK(rows[i].c_emp == doctest::Approx(4.0).epsilon(0.05));
    }

    const auto far = keyest1_functional(tr, cutoff(10.0, 1.0, 4, 2));
    for (const auto& r : far) {
        CHECK(r.lhs == 0.0);
        CHECK(r.time_term == 0.0);
        CHECK(r.initial == 0.0);
        CHECK(r.eps == 0.0);
    }
    CHECK(kind_of([&] { keyest1_functional(FlowTrajectory{}, g); }) == ErrorKind::TooFewSnapshots);
}

TEST_CASE("key estimate functional under refinement") {
    struct Case {
        const char* preset;
        double z_center, rho;
    };
    for (const auto& [p, zc, rho] : {Case{"perturbed_sphere:1,0.05,3", 0.3, 2.0}, Case{"torus:2,1", 0.0, 4.0}}) {
        double last[2];
        int j = 0;
        for (int n : {64, 128}) {
            const auto tr = evolve(make(p, n), ConstraintFunction::zero(), cfg(1e-3, 1e-4));
            last[j++] = keyest1_functional(tr, cutoff(zc, rho, 4, 2)).back().lhs;
        }
        INFO(std::string(p), " ", last[0], " ", last[1]);
        CHECK(std::abs(last[1] - last[0]) <= 0.01 * std::abs(last[1]));
    }
}

TEST_CASE("appendix audits on the sphere") {
    const auto s = make("sphere:1", 256);
    const auto g = cutoff(0.0, 3.0, 4, 2);
    const double golden2 = 1.0 / (80 * pi * pi);
    const auto a = audit_ms2(s, g, AuditField::A);
    CHECK(a.lhs == doctest::Approx(4.0).epsilon(1e-8));
    CHECK(a.c_emp == doctest::Approx(golden2).epsilon(1e-6));
    CHECK(a.finite);
    CHECK(!a.vacuous);
    const auto h = audit_ms2(s, g, AuditField::H);
    CHECK(h.lhs == doctest::Approx(16.0).epsilon(1e-8));
    CHECK(h.c_emp == doctest::Approx(golden2).epsilon(1e-6));

    // lhs = int |A|^6 = 32 pi; rhs = 8 pi * 32 pi + c_gamma1^4 (8 pi)^2, c_gamma1 = 15 / 12.
    const auto m1 = audit_ms1(s, g);
    CHECK(m1.lhs == doctest::Approx(32 * pi).epsilon(1e-6));
    CHECK(m1.c_emp == doctest::Approx(32 * pi / (256 * pi * pi + std::pow(1.25, 4) * 64 * pi * pi)).epsilon(1e-6));

    const auto far = cutoff(10.0, 1.0, 4, 2);
    for (const auto& r : {audit_ms1(s, far), audit_ms2(s, far, AuditField::A), audit_ms2(s, far, AuditField::H)}) {
        CHECK(r.vacuous);
        CHECK(r.lhs == 0.0);
        CHECK(r.rhs_structure == 0.0);
        CHECK(r.finite);
    }
}

TEST_CASE("appendix audits are stable under refinement on the torus") {
    for (int k : {1, 2}) {
        const auto g = cutoff(0.0, 3.0, 4, k + 1);
        const auto c = make("torus:2,1", 128, k), f = make("torus:2,1", 256, k);
        const AuditRecord pairs[][2] = {{audit_ms1(c, g), audit_ms1(f, g)},
                                        {audit_ms2(c, g, AuditField::A), audit_ms2(f, g, AuditField::A)},
                                        {audit_ms2(c, g, AuditField::H), audit_ms2(f, g, AuditField::H)}};
        for (const auto& [a, b] : pairs) {
            INFO(a.name, " k=", k);
            CHECK(a.finite);
            CHECK(b.finite);
            CHECK(std::abs(b.c_emp - a.c_emp) <= 0.05 * std::abs(b.c_emp));
        }
    }
}
