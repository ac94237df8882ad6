#pragma once

#include "csdflow/errors.hpp"
#include "csdflow/flow.hpp"
#include "csdflow/profile.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace csdflow {

enum ExitCode : int {
    kExitOk = 0,
    kExitSingularity = 2,
    kExitStepFloor = 3,
    kExitUsage = 64,
    kExitData = 65,
    kExitInternal = 70,
};

int exit_code(Termination t);
int exit_code(ErrorKind kind);

struct RunConfig {
    std::string preset;  // "name:params"; ignored when profile is set
    std::string profile; // snapshot CSV (with its .meta sidecar)
    int k = 1;
    std::size_t nodes = 64;
    std::string constraint = "zero";

    double t_end = 1.0;
    double snapshot_every = 0.0; // 0: t_end / 100
    double cfl = 0.0;            // 0: default_cfl(k)
    int remesh_every = 10;
    double stop_normsqA_max = 1e4;
    double dt_floor = 1e-14;

    bool monitor = true;
    double rho = 0.0;  // > 0 fixes the monitor radius
    double eps0 = 0.0; // > 0 (with rho = 0) picks rho = choose_rho(eps0)
    std::vector<int> m_list; // empty: {n}

    std::string out_dir = "out";
    std::uint64_t seed = 0;
    double noise = 0.0; // amplitude of the seeded smooth normal perturbation

    std::vector<double> lambdas;           // sweep
    std::vector<std::size_t> resolutions;  // check / audit; empty: command default
    bool evolution = false;                // check: add the evolution-law windows
    double tau = 0.0;                      // check: window half-width (0: chosen from N)
    std::string corpus = "default";        // audit
};

// need_surface: a preset or profile must be given (audit falls back to its corpus).
void validate_run_config(const RunConfig& c, bool need_surface = true);

// Initial surface: preset or profile file, resampled to c.nodes when read from
// a file, then perturbed when c.noise > 0.
ProfileSurface initial_surface(const RunConfig& c);
FlowConfig flow_config(const RunConfig& c);

// Each returns the process exit status and prints a short report on stdout.
int cmd_run(const RunConfig& c);
int cmd_sweep(const RunConfig& c);
int cmd_check(const RunConfig& c);
int cmd_audit(const RunConfig& c);

} // namespace csdflow
