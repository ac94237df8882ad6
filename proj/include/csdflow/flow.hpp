#pragma once

#include "csdflow/constraint.hpp"
#include "csdflow/curvature.hpp"
#include "csdflow/profile.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace csdflow {

// Largest cfl with a safety margin for which RK4 stays stable on the pole
// stencils of the given symmetry rank.
double default_cfl(int symmetry_rank);

struct FlowConfig {
    double cfl = 0.0; // 0 selects default_cfl(k)
    double t_end = 1.0;
    int remesh_every = 10; // 0 disables remeshing
    double snapshot_every = 0.01;
    // Relative to the initial diameter D0: the run stops once
    // max |A|^2 >= stop_normsqA_max / D0^2.
    double stop_normsqA_max = 1e4;
    double dt_floor = 1e-14;
    // When > 0, every step uses this size instead of adaptive_dt (clipped to
    // land on snapshot times). Used for evolution-identity windows.
    double fixed_dt = 0.0;
    // Optional cap on the number of snapshots kept in memory (0 = all). The
    // first snapshot and the most recent ones are retained.
    std::size_t keep_snapshots = 0;
};

void validate_config(const FlowConfig& c);

enum class Termination {
    ReachedTEnd,
    SingularityDetected,
    StepFloor,
    Breakdown, // the profile self-intersected or lost regularity
};

std::string to_string(Termination t);

struct Snapshot {
    double t = 0.0;
    ProfileSurface surface;
    CurvatureField field;
    std::size_t remesh_count = 0; // remeshes performed before this snapshot
    std::size_t step = 0;
};

struct DiagnosticRow {
    double t = 0.0;
    double area = 0.0;
    double volume = 0.0;
    double dissipation = 0.0; // integral of |grad H|^2
    double h_integral_H = 0.0; // h(t) * integral of H
    double h_area = 0.0;       // h(t) * area
    double max_normsqA = 0.0;
    double dt = 0.0;
    double eta = std::numeric_limits<double>::quiet_NaN();
};

struct FlowTrajectory {
    std::vector<Snapshot> snapshots;
    std::vector<DiagnosticRow> diagnostics;
    Termination termination = Termination::ReachedTEnd;
    double T_num = std::numeric_limits<double>::quiet_NaN();
    double T_fit_residual = std::numeric_limits<double>::quiet_NaN();
    double stop_threshold = 0.0;
    double initial_diameter = 0.0;
    std::size_t steps = 0;
    std::size_t remeshes = 0;
    std::string message;
};

std::vector<double> normal_velocity(const ProfileSurface& s, const ConstraintFunction& h, double t);
ProfileSurface step(const ProfileSurface& s, const ConstraintFunction& h, double t, double dt);
double adaptive_dt(const ProfileSurface& s, double cfl);

// Called after every recorded snapshot; returning false stops the run early
// (termination stays ReachedTEnd with a message).
using SnapshotObserver = std::function<bool(const Snapshot&)>;

FlowTrajectory evolve(const ProfileSurface& s0, const ConstraintFunction& h, const FlowConfig& config,
                      const SnapshotObserver& observer = {});

struct ConservationRow {
    double t = 0.0;
    double dV_residual = 0.0;
    double dA_residual = 0.0;
};

std::vector<ConservationRow> conservation_diagnostics(const FlowTrajectory& traj);

// Least-squares line through (t_i, 1 / max|A|^2_i); returns the zero crossing
// and the RMS residual of the fit.
struct BlowupFit {
    double T = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN();
};
BlowupFit fit_blowup(std::span<const double> t, std::span<const double> max_normsqA);

} // namespace csdflow
