#pragma once

#include "csdflow/curvature.hpp"
#include "csdflow/flow.hpp"
#include "csdflow/identities.hpp"
#include "csdflow/monitor.hpp"
#include "csdflow/profile.hpp"

#include <string>
#include <vector>

namespace csdflow::io {

struct ProfileFile {
    ProfileSurface surface;
    double time = 0.0;
};

// `path` gets the s,r,z table; `path + ".meta"` the k / topology / time sidecar.
void write_profile(const std::string& path, const ProfileSurface& s, double time);
// Validates the profile; every failure is reported as DataFormat naming the file.
ProfileFile read_profile(const std::string& path);

void write_field(const std::string& path, const ProfileSurface& s, const CurvatureField& c);

// t,area,volume,dissipation,max_normsqA,dt,eta
void write_diagnostics(const std::string& path, const std::vector<DiagnosticRow>& rows);
void write_conservation(const std::string& path, const std::vector<ConservationRow>& rows);

// t,eta,argmax_r,argmax_z plus `summary_path` with the rho / eps0 / c_eta /
// c_fit / lifespan_bound block.
void write_concentration(const std::string& csv_path, const std::string& summary_path,
                         const ConcentrationReport& rep);

// identity,nodes,dt,max_residual,l2_residual,order
void write_residuals(const std::string& path, const std::vector<ResidualReport>& rows);

// Whole-file write; throws DataFormat if the file cannot be written.
void write_text(const std::string& path, const std::string& text);

} // namespace csdflow::io
