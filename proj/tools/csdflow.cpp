#include "csdflow/scenario.hpp"
#include "csdflow/textio.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>

using namespace csdflow;

namespace {

struct Lists {
    std::string m, lambdas, resolutions;
};

std::string config_file; // consumed before parsing; declared for --help

void add_common(CLI::App& app, RunConfig& c) {
    app.add_option("--config", config_file, "key=value file; every key is a long flag name, flags given here override it");
    app.add_option("--preset", c.preset, "preset, e.g. sphere:1, torus:2,1, dumbbell:0.15,6");
    app.add_option("--profile", c.profile, "initial profile snapshot (s,r,z CSV with .meta sidecar)");
    app.add_option("--k", c.k, "symmetry rank (n = k + 1)");
    app.add_option("--nodes", c.nodes, "profile nodes (>= 64)");
    app.add_option("--constraint", c.constraint, "zero | const:<c> | exp | sin | recip | negt | table:<csv>");
    app.add_option("--out", c.out_dir, "output directory");
    app.add_option("--seed", c.seed, "seed of the initial perturbation");
    app.add_option("--noise", c.noise, "amplitude of the seeded perturbation, relative to the diameter");
}

void add_flow(CLI::App& app, RunConfig& c, Lists& l) {
    app.add_option("--t-end", c.t_end, "final time");
    app.add_option("--snapshot-every", c.snapshot_every, "snapshot spacing (default t_end / 100)");
    app.add_option("--cfl", c.cfl, "time step factor (default per k)");
    app.add_option("--remesh-every", c.remesh_every, "steps between remeshes (0 disables)");
    app.add_option("--stop-normsqA", c.stop_normsqA_max, "singularity threshold on max |A|^2 D0^2");
    app.add_option("--dt-floor", c.dt_floor, "smallest admissible time step");
    app.add_flag("!--no-monitor", c.monitor, "skip concentration tracking");
    app.add_option("--rho", c.rho, "monitor radius");
    app.add_option("--eps0", c.eps0, "choose the monitor radius from this threshold");
    app.add_option("--m", l.m, "concentration exponents, comma separated (2 and/or n)");
}

void take_last(CLI::App& app) {
    for (auto* opt : app.get_options())
        if (opt->get_name() != "--help") opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

// Turns the key=value file into flags for `sub`. Unknown keys are left for
// the parser to reject.
std::vector<std::string> config_args(const std::string& path, CLI::App& sub) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::ConfigParse, path + ": cannot open config file");
    std::vector<std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = textio::trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';' || t[0] == '[') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            fail(ErrorKind::ConfigParse, path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = textio::trim(t.substr(0, eq)), value = textio::trim(t.substr(eq + 1));
        for (auto& ch : key)
            if (ch == '_') ch = '-';
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        const std::string flag = "--" + key;
        const CLI::Option* opt = nullptr;
        try {
            opt = sub.get_option(flag);
        } catch (const CLI::OptionNotFound&) {
        }
        if (opt && opt->get_expected_min() == 0) {
            if (value == "true" || value == "1" || value == "yes") out.push_back(flag);
            else if (value != "false" && value != "0" && value != "no")
                fail(ErrorKind::ConfigParse, path + ":" + std::to_string(lineno) + ": '" + key + "' takes true/false");
            continue;
        }
        out.push_back(flag);
        out.push_back(value);
    }
    return out;
}

template <class T> std::vector<T> parse_list(const std::string& text, const std::string& what) {
    std::vector<T> out;
    for (double v : textio::parse_double_list(text, what)) {
        if constexpr (std::is_integral_v<T>) {
            if (v != std::floor(v) || v < 0) fail(ErrorKind::ConfigParse, what + ": expected whole numbers");
        }
        out.push_back(static_cast<T>(v));
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained surface diffusion flow of axisymmetric hypersurfaces"};
    app.require_subcommand(1);
    RunConfig c;
    Lists lists;

    auto* run = app.add_subcommand("run", "evolve one scenario");
    add_common(*run, c);
    add_flow(*run, c, lists);

    auto* sweep = app.add_subcommand("sweep", "lambda family for the lifespan scaling fit");
    add_common(*sweep, c);
    add_flow(*sweep, c, lists);
    sweep->add_option("--lambdas", lists.lambdas, "scale factors, comma separated");

    auto* check = app.add_subcommand("check", "identity residuals and convergence orders");
    add_common(*check, c);
    check->add_option("--resolutions", lists.resolutions, "node counts, comma separated");
    check->add_flag("--evolution", c.evolution, "also check the evolution laws");
    check->add_option("--tau", c.tau, "evolution window half-width");
    check->add_option("--cfl", c.cfl, "time step factor for the evolution windows");

    auto* audit = app.add_subcommand("audit", "appendix estimate audits over a corpus");
    add_common(*audit, c);
    audit->add_option("--corpus", c.corpus, "default, or a ';'-separated preset list");
    audit->add_option("--resolutions", lists.resolutions, "node counts, comma separated");

    for (auto* sub : {run, sweep, check, audit}) take_last(*sub);

    try {
        std::vector<std::string> args(argv, argv + argc);
        if (args.size() >= 2) {
            CLI::App* sub = nullptr;
            for (auto* s : {run, sweep, check, audit})
                if (s->get_name() == args[1]) sub = s;
            std::optional<std::string> config;
            std::vector<std::string> rest;
            for (std::size_t i = 2; i < args.size(); ++i) {
                if (args[i] == "--config" && i + 1 < args.size()) config = args[++i];
                else if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
                else rest.push_back(args[i]);
            }
            if (sub && config) {
                auto injected = config_args(*config, *sub);
                args.resize(2);
                args.insert(args.end(), injected.begin(), injected.end());
                args.insert(args.end(), rest.begin(), rest.end());
            }
        }
        std::vector<char*> ptrs;
        for (auto& a : args) ptrs.push_back(a.data());
        app.parse(int(ptrs.size()), ptrs.data());
        if (!lists.m.empty()) c.m_list = parse_list<int>(lists.m, "m");
        if (!lists.lambdas.empty()) c.lambdas = parse_list<double>(lists.lambdas, "lambdas");
        if (!lists.resolutions.empty()) c.resolutions = parse_list<std::size_t>(lists.resolutions, "resolutions");
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    }

    try {
        if (run->parsed()) return cmd_run(c);
        if (sweep->parsed()) return cmd_sweep(c);
        if (check->parsed()) {
            if (c.preset.empty() && c.profile.empty()) c.preset = "torus:2,1";
            return cmd_check(c);
        }
        if (audit->parsed()) return cmd_audit(c);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
