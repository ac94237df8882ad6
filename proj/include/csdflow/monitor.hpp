#pragma once

#include "csdflow/curvature.hpp"
#include "csdflow/flow.hpp"
#include "csdflow/profile.hpp"

#include <limits>
#include <string>
#include <vector>

namespace csdflow {

struct Center {
    double r = 0.0; // distance from the axis (orbit representative)
    double z = 0.0;
};

enum class CenterSet {
    SurfaceAndAxis, // surface points plus the rotation axis
    Surface,        // surface points only
};

// Candidate ball centers for the sup over x: every node and three chord
// points per segment, plus (SurfaceAndAxis) axis points at the same spacing
// over the z-range of the profile. The set depends on the surface only, so
// concentration() is monotone in rho.
std::vector<Center> concentration_centers(const ProfileSurface& s, CenterSet set = CenterSet::SurfaceAndAxis);

struct ConcentrationValue {
    double value = 0.0;
    Center argmax;
};

// sup over centers of the integral of |A|^m over f^{-1}(B_rho(center)).
ConcentrationValue concentration(const ProfileSurface& s, double rho, int m,
                                 CenterSet set = CenterSet::SurfaceAndAxis);
ConcentrationValue concentration(const ProfileSurface& s, const CurvatureField& c, double rho, int m,
                                 const std::vector<Center>& centers);

// Largest rho (to 1% relative) with concentration <= eps0, clamped at the
// diameter.
double choose_rho(const ProfileSurface& s, double eps0, int m, CenterSet set = CenterSet::SurfaceAndAxis);

struct EtaSample {
    double t = 0.0;
    double eta = 0.0;
    Center argmax;
    double c_emp = 0.0;       // eta / max(eps0, eta(0))
    double half_radius = 0.0; // sup of ball integrals at radius rho / 2
    bool covering_ok = true;  // eta <= c_eta * half_radius
};

struct ConcentrationReport {
    int m = 2;
    double rho = 0.0;
    double eps0 = 0.0;
    std::string center_grid;
    std::vector<std::pair<Center, double>> eps_map; // at t = 0
    std::vector<EtaSample> eta_series;
    double c_eta = 0.0;
    double c_fit = std::numeric_limits<double>::quiet_NaN();
    double lifespan_bound = std::numeric_limits<double>::quiet_NaN();
    // Whether eta stayed below 3 c_eta eps0 on [0, lifespan_bound].
    bool window_below_threshold = true;
};

// 4^{n+1}.
double covering_constant(int n);

// eps0 = 0 uses eta(0).
ConcentrationReport track(const FlowTrajectory& traj, double rho, int m, double eps0 = 0.0);
// Sets c_fit and lifespan_bound = rho^4 / c_fit and re-evaluates the window
// flag (NaN clears the bound; the whole series is then checked).
void apply_lifespan_fit(ConcentrationReport& rep, double c_fit);
EtaSample eta_at(const Snapshot& snap, double rho, int m);

struct LifespanFit {
    double c_fit = 0.0;
    double slope = 0.0;     // least-squares d log T / d log rho
    double intercept = 0.0; // log T at log rho = 0
};

// experiments = (rho, T_num) pairs.
LifespanFit fit_lifespan_constant(const std::vector<std::pair<double, double>>& experiments);

// Quintic smoothstep cutoff gamma~(y) = psi(|y - x| / rho) with the center
// on the rotation axis (so gamma is axisymmetric).
struct CutoffFn {
    double z_center = 0.0;
    double rho = 1.0;
    int s = 4;
    double c_gamma1 = 0.0;
    double c_gamma2 = 0.0;
};

double cutoff_profile(double t);
double cutoff_profile_d1(double t);
double cutoff_profile_d2(double t);

// n = intrinsic dimension; the C^2 bound depends on it.
CutoffFn cutoff(double z_center, double rho, int s, int n);

struct CutoffEvaluation {
    std::vector<double> gamma;
    std::vector<double> grad;   // |grad gamma| by finite differences
    std::vector<double> hess;   // |grad^2 gamma|
    bool grad_ok = true;        // grad <= 1.05 c_gamma1 everywhere
    bool hess_ok = true;        // hess <= 1.05 c_gamma2 (1 + |A|) everywhere
    double worst_grad_ratio = 0.0;
    double worst_hess_ratio = 0.0;
};

CutoffEvaluation evaluate_cutoff(const ProfileSurface& s, const CutoffFn& g);

struct KeyEstimateRow {
    double t = 0.0;
    double lhs = 0.0;       // integral over [gamma = 1] of |A|^2 plus the space-time term
    double time_term = 0.0; // the space-time part of lhs
    double initial = 0.0;   // integral over [gamma > 0] of |A|^2 at t = 0
    double eps = 0.0;       // sup over snapshots of the integral over [gamma > 0] of |A|^n
    double c_emp = std::numeric_limits<double>::quiet_NaN();
};

std::vector<KeyEstimateRow> keyest1_functional(const FlowTrajectory& traj, const CutoffFn& g);

struct AuditRecord {
    std::string name;
    double lhs = 0.0;
    double rhs_structure = 0.0;
    double c_emp = 0.0; // lhs / rhs_structure, 0 for a vacuous audit
    bool vacuous = false;
    bool finite = true;
};

AuditRecord audit_ms1(const ProfileSurface& s, const CutoffFn& g);

enum class AuditField { A, H };
AuditRecord audit_ms2(const ProfileSurface& s, const CutoffFn& g, AuditField field);

} // namespace csdflow
