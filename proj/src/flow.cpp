#include "csdflow/flow.hpp"

#include "csdflow/errors.hpp"
#include "csdflow/textio.hpp"

#include <algorithm>
#include <cmath>

namespace csdflow {

using discrete::Parity;

std::string to_string(Termination t) {
    switch (t) {
    case Termination::ReachedTEnd: return "ReachedTEnd";
    case Termination::SingularityDetected: return "SingularityDetected";
    case Termination::StepFloor: return "StepFloor";
    case Termination::Breakdown: return "Breakdown";
    }
    return "Unknown";
}

double default_cfl(int symmetry_rank) { return symmetry_rank == 1 ? 0.05 : 0.03; }

void validate_config(const FlowConfig& c) {
    auto bad = [](const std::string& m) { fail(ErrorKind::InvalidConfig, m); };
    if (!(c.cfl == 0.0 || (c.cfl > 0.0 && c.cfl <= 0.5))) bad("cfl must lie in (0, 0.5]");
    if (!(c.t_end > 0.0) || !std::isfinite(c.t_end)) bad("t_end must be positive and finite");
    if (c.remesh_every < 0) bad("remesh_every must be >= 0");
    if (!(c.snapshot_every > 0.0)) bad("snapshot_every must be positive");
    if (!(c.stop_normsqA_max > 0.0)) bad("stop_normsqA_max must be positive");
    if (!(c.dt_floor > 0.0)) bad("dt_floor must be positive");
    if (!(c.fixed_dt >= 0.0)) bad("fixed_dt must be >= 0");
}

namespace {

// Method-of-lines right-hand side on raw node arrays.
class Rhs {
public:
    Rhs(std::size_t n, int k, Topology topology)
        : n_(n), k_(k), topo_(topology), ru_(n), ruu_(n), zu_(n), zuu_(n), inv_speed_(n), inv_r_(n), speed_u_(n), kp_(n), kr_(n), H_(n),
          Hu_(n), Huu_(n) {}

    // Fills vr, vz with F nu. Returns false on degenerate geometry.
    bool operator()(std::span<const double> r, std::span<const double> z, double h, std::span<double> vr,
                    std::span<double> vz) {
        discrete::diff(r, topo_, Parity::Odd, ru_, ruu_);
        discrete::diff(z, topo_, Parity::Even, zu_, zuu_);
        for (std::size_t i = 0; i < n_; ++i) {
            const double L2 = ru_[i] * ru_[i] + zu_[i] * zu_[i];
            const double iL = 1.0 / std::sqrt(L2);
            inv_speed_[i] = iL;
            speed_u_[i] = (ru_[i] * ruu_[i] + zu_[i] * zuu_[i]) * iL;
            kp_[i] = (ru_[i] * zuu_[i] - zu_[i] * ruu_[i]) * iL * iL * iL;
            if (discrete::is_pole(i, n_, topo_)) {
                kr_[i] = 0.0;
                inv_r_[i] = 0.0;
            } else {
                if (!(r[i] > 0.0)) return false;
                inv_r_[i] = 1.0 / r[i];
                kr_[i] = zu_[i] * iL * inv_r_[i];
            }
        }
        if (topo_ == Topology::PoleToPole)
            for (std::size_t i : {std::size_t{0}, n_ - 1}) kr_[i] = discrete::pole_limit(kr_, i);
        max_normsqA = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            H_[i] = kp_[i] + k_ * kr_[i];
            max_normsqA = std::max(max_normsqA, kp_[i] * kp_[i] + k_ * kr_[i] * kr_[i]);
        }
        if (!std::isfinite(max_normsqA)) return false;
        discrete::diff(H_, topo_, Parity::Even, Hu_, Huu_);
        for (std::size_t i = 0; i < n_; ++i) {
            const double iL = inv_speed_[i];
            const double Hs = Hu_[i] * iL;
            const double Hss = (Huu_[i] - Hs * speed_u_[i]) * iL * iL;
            const double lap = discrete::is_pole(i, n_, topo_) ? (1.0 + k_) * Hss
                                                               : Hss + k_ * ru_[i] * iL * inv_r_[i] * Hs;
            const double F = (lap + h) * iL;
            vr[i] = discrete::is_pole(i, n_, topo_) ? 0.0 : F * zu_[i];
            vz[i] = -F * ru_[i];
        }
        return true;
    }

    double max_normsqA = 0.0;

private:
    std::size_t n_;
    int k_;
    Topology topo_;
    std::vector<double> ru_, ruu_, zu_, zuu_, inv_speed_, inv_r_, speed_u_, kp_, kr_, H_, Hu_, Huu_;
};

// Classical RK4 on (r, z). Returns false if any stage degenerates.
class Stepper {
public:
    Stepper(std::size_t n, int k, Topology topology)
        : rhs_(n, k, topology), n_(n), tr_(n), tz_(n), k1r_(n), k1z_(n), k2r_(n), k2z_(n), k3r_(n), k3z_(n),
          k4r_(n), k4z_(n) {}

    // Evaluates the first stage at (r, z, t); also yields max |A|^2 there.
    bool prepare(std::span<const double> r, std::span<const double> z, const ConstraintFunction& h, double t) {
        if (!rhs_(r, z, evaluate(h, t), k1r_, k1z_)) return false;
        start_normsqA = rhs_.max_normsqA;
        return true;
    }

    // Completes the step from the state passed to prepare().
    bool complete(std::vector<double>& r, std::vector<double>& z, const ConstraintFunction& h, double t,
                  double dt) {
        if (dt == 0.0) return true;
        const double h2 = evaluate(h, t + 0.5 * dt);
        stage(r, z, 0.5 * dt, k1r_, k1z_);
        if (!rhs_(tr_, tz_, h2, k2r_, k2z_)) return false;
        stage(r, z, 0.5 * dt, k2r_, k2z_);
        if (!rhs_(tr_, tz_, h2, k3r_, k3z_)) return false;
        stage(r, z, dt, k3r_, k3z_);
        if (!rhs_(tr_, tz_, evaluate(h, t + dt), k4r_, k4z_)) return false;
        const double w = dt / 6.0;
        for (std::size_t i = 0; i < n_; ++i) {
            r[i] += w * (k1r_[i] + 2.0 * (k2r_[i] + k3r_[i]) + k4r_[i]);
            z[i] += w * (k1z_[i] + 2.0 * (k2z_[i] + k3z_[i]) + k4z_[i]);
        }
        return true;
    }

    // max |A|^2 at the state of the last prepare() call.
    double start_normsqA = 0.0;

private:
    void stage(const std::vector<double>& r, const std::vector<double>& z, double a, const std::vector<double>& kr,
               const std::vector<double>& kz) {
        for (std::size_t i = 0; i < n_; ++i) {
            tr_[i] = r[i] + a * kr[i];
            tz_[i] = z[i] + a * kz[i];
        }
    }

    Rhs rhs_;
    std::size_t n_;
    std::vector<double> tr_, tz_, k1r_, k1z_, k2r_, k2z_, k3r_, k3z_, k4r_, k4z_;
};

ProfileSurface to_surface(const std::vector<double>& r, const std::vector<double>& z, const ProfileSurface& like) {
    std::vector<ProfileNode> nodes(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) nodes[i] = {r[i], z[i]};
    return ProfileSurface::from_trusted(std::move(nodes), like.symmetry_rank(), like.topology());
}

double max_of(std::span<const double> v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    return m;
}

double dt_formula(double ds_min, double max_normsqA, double cfl) {
    const double d2 = ds_min * ds_min;
    return cfl * d2 * d2 / (1.0 + max_normsqA * d2);
}

bool regular(const std::vector<double>& r, const std::vector<double>& z, Topology topo) {
    const std::size_t n = r.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(r[i]) || !std::isfinite(z[i])) return false;
        if (!discrete::is_pole(i, n, topo) && !(r[i] > 0.0)) return false;
    }
    return true;
}

} // namespace

std::vector<double> normal_velocity(const ProfileSurface& s, const ConstraintFunction& h, double t) {
    const auto frame = make_frame(s);
    const auto c = curvature(frame);
    auto F = laplace_beltrami(frame, c.H);
    const double hv = evaluate(h, t);
    for (double& x : F) x += hv;
    return F;
}

ProfileSurface step(const ProfileSurface& s, const ConstraintFunction& h, double t, double dt) {
    if (!(dt >= 0.0)) fail(ErrorKind::BadParameter, "time step must be >= 0");
    auto r = s.r_values();
    auto z = s.z_values();
    Stepper st(s.size(), s.symmetry_rank(), s.topology());
    if (!st.prepare(r, z, h, t) || !st.complete(r, z, h, t, dt) || !regular(r, z, s.topology()))
        fail(ErrorKind::DegenerateGeometry, "RK4 stage produced an invalid surface");
    return to_surface(r, z, s);
}

double adaptive_dt(const ProfileSurface& s, double cfl) {
    const auto c = curvature(s);
    return dt_formula(s.min_gap(), max_of(c.normsqA), cfl);
}

BlowupFit fit_blowup(std::span<const double> t, std::span<const double> max_normsqA) {
    BlowupFit fit;
    const std::size_t m = t.size();
    if (m < 2 || max_normsqA.size() != m) return fit;
    double st = 0, sy = 0, stt = 0, sty = 0;
    std::vector<double> y(m);
    for (std::size_t i = 0; i < m; ++i) {
        y[i] = 1.0 / max_normsqA[i];
        st += t[i];
        sy += y[i];
    }
    const double tm = st / m, ym = sy / m;
    for (std::size_t i = 0; i < m; ++i) {
        stt += (t[i] - tm) * (t[i] - tm);
        sty += (t[i] - tm) * (y[i] - ym);
    }
    if (!(stt > 0.0)) return fit;
    const double slope = sty / stt;
    const double icpt = ym - slope * tm;
    double res = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double e = y[i] - (icpt + slope * t[i]);
        res += e * e;
    }
    fit.residual = std::sqrt(res / m);
    if (slope < 0.0) fit.T = -icpt / slope;
    return fit;
}

FlowTrajectory evolve(const ProfileSurface& s0, const ConstraintFunction& h, const FlowConfig& cfg,
                      const SnapshotObserver& observer) {
    validate_config(cfg);
    if (cfg.t_end > h.t_max()) fail(ErrorKind::InvalidConfig, "t_end lies beyond the constraint table");
    sup_bound(h, 0.0, cfg.t_end);

    FlowTrajectory traj;
    traj.initial_diameter = diameter(s0);
    traj.stop_threshold = cfg.stop_normsqA_max / (traj.initial_diameter * traj.initial_diameter);

    const std::size_t n = s0.size();
    const Topology topo = s0.topology();
    const int k = s0.symmetry_rank();
    const double cfl = cfg.cfl > 0.0 ? cfg.cfl : default_cfl(k);
    auto r = s0.r_values();
    auto z = s0.z_values();
    Stepper stepper(n, k, topo);

    double t = 0.0;
    double last_dt = 0.0;
    std::size_t next_snap = 1;
    std::vector<double> snap_t, snap_A;

    auto snapshot_time = [&](std::size_t j) { return cfg.snapshot_every * static_cast<double>(j); };

    auto record = [&](const ProfileSurface& s) -> bool {
        Snapshot snap;
        snap.t = t;
        snap.surface = s;
        const auto frame = make_frame(s);
        snap.field = curvature(frame);
        snap.remesh_count = traj.remeshes;
        snap.step = traj.steps;
        const auto w = measure_weights(frame);
        DiagnosticRow row;
        row.t = t;
        row.area = area(s);
        row.volume = volume(s);
        double dis = 0.0, intH = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dis += w[i] * snap.field.gradH[i] * snap.field.gradH[i];
            intH += w[i] * snap.field.H[i];
        }
        const double hv = evaluate(h, t);
        row.dissipation = dis;
        row.h_integral_H = hv * intH;
        row.h_area = hv * row.area;
        row.max_normsqA = max_of(snap.field.normsqA);
        row.dt = last_dt;
        traj.diagnostics.push_back(row);
        snap_t.push_back(t);
        snap_A.push_back(row.max_normsqA);
        const bool go_on = !observer || observer(snap);
        traj.snapshots.push_back(std::move(snap));
        if (cfg.keep_snapshots > 0 && traj.snapshots.size() > cfg.keep_snapshots)
            traj.snapshots.erase(traj.snapshots.begin() + 1);
        return go_on;
    };

    auto finish_fit = [&]() {
        const std::size_t m = std::min<std::size_t>(10, snap_t.size());
        const auto fit = fit_blowup(std::span(snap_t).last(m), std::span(snap_A).last(m));
        traj.T_fit_residual = fit.residual;
        traj.T_num = std::isfinite(fit.T) ? std::max(fit.T, t) : t;
    };

    if (!record(s0)) {
        traj.message = "stopped by observer";
        return traj;
    }

    std::size_t since_remesh = 0;
    double dt_pending = 0.0;
    auto breakdown = [&](const std::string& why) {
        traj.termination = Termination::Breakdown;
        traj.message = why + " at t=" + textio::format_double(t);
    };
    if (!stepper.prepare(r, z, h, t)) breakdown("degenerate geometry");
    while (traj.termination == Termination::ReachedTEnd && t < cfg.t_end) {
        const double normsqA = stepper.start_normsqA;
        if (normsqA >= traj.stop_threshold) {
            traj.termination = Termination::SingularityDetected;
            break;
        }
        double dt;
        if (cfg.fixed_dt > 0.0) {
            dt = cfg.fixed_dt;
        } else {
            double gap2 = std::numeric_limits<double>::infinity();
            const std::size_t segs = topo == Topology::Ring ? n : n - 1;
            for (std::size_t i = 0; i < segs; ++i) {
                const std::size_t j = i + 1 == n ? 0 : i + 1;
                const double dr = r[j] - r[i], dz = z[j] - z[i];
                gap2 = std::min(gap2, dr * dr + dz * dz);
            }
            dt = dt_formula(std::sqrt(gap2), normsqA, cfl);
        }
        if (dt_pending > 0.0) dt = std::min(dt, dt_pending);
        double t_snap = snapshot_time(next_snap);
        if (t_snap >= cfg.t_end * (1.0 - 1e-12)) t_snap = cfg.t_end;
        bool hits_snap = false;
        if (t + dt >= t_snap - 1e-14 * t_snap) {
            dt = t_snap - t;
            hits_snap = true;
        }
        if (dt < cfg.dt_floor && !hits_snap) {
            traj.termination = Termination::StepFloor;
            break;
        }
        auto r_new = r, z_new = z;
        if (!stepper.complete(r_new, z_new, h, t, dt) || !regular(r_new, z_new, topo)) {
            dt_pending = 0.5 * dt;
            if (dt_pending < cfg.dt_floor) traj.termination = Termination::StepFloor;
            continue;
        }
        dt_pending = 0.0;
        r.swap(r_new);
        z.swap(z_new);
        t = hits_snap ? t_snap : t + dt;
        last_dt = dt;
        ++traj.steps;
        ++since_remesh;

        if (cfg.remesh_every > 0 && since_remesh >= static_cast<std::size_t>(cfg.remesh_every)) {
            since_remesh = 0;
            const auto s = resample_arclength(to_surface(r, z, s0), n);
            if (profile_self_intersects(s.nodes(), topo)) {
                breakdown("profile self-intersected");
                break;
            }
            r = s.r_values();
            z = s.z_values();
            ++traj.remeshes;
        }
        if (!stepper.prepare(r, z, h, t)) {
            breakdown("degenerate geometry");
            break;
        }
        if (hits_snap) {
            ++next_snap;
            try {
                if (!record(to_surface(r, z, s0))) {
                    traj.message = "stopped by observer";
                    break;
                }
            } catch (const Error& e) {
                breakdown(e.what());
                break;
            }
        }
    }

    const bool at_snapshot = !traj.snapshots.empty() && traj.snapshots.back().t == t;
    if (!at_snapshot && traj.termination != Termination::Breakdown) {
        try {
            record(to_surface(r, z, s0));
        } catch (const Error& e) {
            traj.message = e.what();
        }
    }
    if (traj.termination == Termination::SingularityDetected) finish_fit();
    return traj;
}

std::vector<ConservationRow> conservation_diagnostics(const FlowTrajectory& traj) {
    const auto& d = traj.diagnostics;
    if (d.size() < 3) fail(ErrorKind::TooFewSnapshots, "conservation diagnostics need >= 3 snapshots");
    std::vector<ConservationRow> out;
    for (std::size_t i = 1; i + 1 < d.size(); ++i) {
        const double dt = d[i + 1].t - d[i - 1].t;
        if (!(dt > 0.0)) continue;
        ConservationRow row;
        row.t = d[i].t;
        // Non-uniform centred difference, second order in the snapshot gaps.
        const double h0 = d[i].t - d[i - 1].t, h1 = d[i + 1].t - d[i].t;
        auto deriv = [&](double fm, double f0, double fp) {
            return (h0 * h0 * (fp - f0) + h1 * h1 * (f0 - fm)) / (h0 * h1 * (h0 + h1));
        };
        row.dV_residual = deriv(d[i - 1].volume, d[i].volume, d[i + 1].volume) - d[i].h_area;
        row.dA_residual = deriv(d[i - 1].area, d[i].area, d[i + 1].area) - (-d[i].dissipation + d[i].h_integral_H);
        out.push_back(row);
    }
    return out;
}

} // namespace csdflow
