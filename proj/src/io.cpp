#include "csdflow/io.hpp"

#include "csdflow/errors.hpp"
#include "csdflow/textio.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace csdflow::io {

using textio::csv_row;
using textio::format_double;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::DataFormat, path + ": cannot open for writing");
    out << text;
    if (!out) fail(ErrorKind::DataFormat, path + ": write failed");
}

namespace {

std::vector<double> arc_lengths(const ProfileSurface& s) {
    std::vector<double> out(s.size(), 0.0);
    for (std::size_t i = 1; i < s.size(); ++i)
        out[i] = out[i - 1] + std::hypot(s[i].r - s[i - 1].r, s[i].z - s[i - 1].z);
    return out;
}

} // namespace

void write_profile(const std::string& path, const ProfileSurface& s, double time) {
    const auto arc = arc_lengths(s);
    std::string text = "s,r,z\n";
    for (std::size_t i = 0; i < s.size(); ++i) text += csv_row({arc[i], s[i].r, s[i].z}) + "\n";
    write_text(path, text);
    write_text(path + ".meta", "k=" + std::to_string(s.symmetry_rank()) + "\ntopology=" + to_string(s.topology()) +
                                   "\ntime=" + format_double(time) + "\n");
}

ProfileFile read_profile(const std::string& path) {
    const auto table = textio::read_csv(path, {"s", "r", "z"});
    const std::string meta_path = path + ".meta";
    std::ifstream meta(meta_path);
    if (!meta) fail(ErrorKind::DataFormat, meta_path + ": cannot open metadata sidecar");
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(meta, line)) {
        ++lineno;
        const auto t = textio::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            fail(ErrorKind::DataFormat, meta_path + ":" + std::to_string(lineno) + ": expected key=value");
        kv[textio::trim(t.substr(0, eq))] = textio::trim(t.substr(eq + 1));
    }
    auto need = [&](const std::string& key) {
        const auto it = kv.find(key);
        if (it == kv.end()) fail(ErrorKind::DataFormat, meta_path + ": missing key '" + key + "'");
        return it->second;
    };
    ProfileFile out;
    try {
        const long k = textio::parse_long(need("k"), "k");
        if (k != 1 && k != 2) fail(ErrorKind::DataFormat, "k must be 1 or 2");
        const Topology topo = parse_topology(need("topology"));
        out.time = kv.count("time") ? textio::parse_double(kv["time"], "time") : 0.0;
        std::vector<ProfileNode> nodes(table.rows());
        for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = {table.columns[1][i], table.columns[2][i]};
        out.surface = ProfileSurface::from_trusted(std::move(nodes), static_cast<int>(k), topo);
        validate_profile(out.surface);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::DataFormat && std::string(e.what()).find(path) != std::string::npos) throw;
        fail(ErrorKind::DataFormat, path + ": " + e.what());
    }
    return out;
}

void write_field(const std::string& path, const ProfileSurface& s, const CurvatureField& c) {
    const auto arc = arc_lengths(s);
    std::string text = "s,r,z,H,kappa_p,kappa_rot,normsqA,normsqAo,gradH,normsqGradA,normsqHessA\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        text += csv_row({arc[i], s[i].r, s[i].z, c.H[i], c.kappa_p[i], c.kappa_rot[i], c.normsqA[i], c.normsqAo[i],
                         c.gradH[i], c.normsqGradA[i], c.normsqHessA[i]}) +
                "\n";
    write_text(path, text);
}

void write_diagnostics(const std::string& path, const std::vector<DiagnosticRow>& rows) {
    std::string text = "t,area,volume,dissipation,max_normsqA,dt,eta\n";
    for (const auto& r : rows)
        text += csv_row({r.t, r.area, r.volume, r.dissipation, r.max_normsqA, r.dt, r.eta}) + "\n";
    write_text(path, text);
}

void write_conservation(const std::string& path, const std::vector<ConservationRow>& rows) {
    std::string text = "t,dV_residual,dA_residual\n";
    for (const auto& r : rows) text += csv_row({r.t, r.dV_residual, r.dA_residual}) + "\n";
    write_text(path, text);
}

void write_concentration(const std::string& csv_path, const std::string& summary_path,
                         const ConcentrationReport& rep) {
    std::string text = "t,eta,argmax_r,argmax_z\n";
    for (const auto& e : rep.eta_series) text += csv_row({e.t, e.eta, e.argmax.r, e.argmax.z}) + "\n";
    write_text(csv_path, text);
    std::ostringstream os;
    os << "m=" << rep.m << "\n"
       << "rho=" << format_double(rep.rho) << "\n"
       << "eps0=" << format_double(rep.eps0) << "\n"
       << "c_eta=" << format_double(rep.c_eta) << "\n"
       << "c_fit=" << (std::isnan(rep.c_fit) ? "" : format_double(rep.c_fit)) << "\n"
       << "lifespan_bound=" << (std::isnan(rep.lifespan_bound) ? "" : format_double(rep.lifespan_bound)) << "\n"
       << "center_grid=" << rep.center_grid << "\n"
       << "window_below_threshold=" << (rep.window_below_threshold ? "true" : "false") << "\n";
    bool covering = true;
    for (const auto& e : rep.eta_series) covering = covering && e.covering_ok;
    os << "covering_bound_holds=" << (covering ? "true" : "false") << "\n";
    write_text(summary_path, os.str());
}

void write_residuals(const std::string& path, const std::vector<ResidualReport>& rows) {
    std::string text = "identity,nodes,dt,max_residual,l2_residual,order\n";
    for (const auto& r : rows)
        text += r.name + "," + std::to_string(r.nodes) + "," + csv_row({r.dt, r.max, r.l2, r.order}) + "\n";
    write_text(path, text);
}

} // namespace csdflow::io
