#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "topowg/errors.hpp"
#include "topowg/parallel.hpp"

#ifndef TOPOWG_VERSION
#define TOPOWG_VERSION "unknown"
#endif

namespace {

using namespace topowg;
using namespace topowg::cli;

void error_record(const std::string& kind, const std::string& message, int code) {
    nlohmann::json j{{"error", kind}, {"message", message}, {"exit_code", code}};
    std::cerr << j.dump() << std::endl;
}

std::string eigen_version() {
    return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
           std::to_string(EIGEN_MINOR_VERSION);
}

void write_manifest(const Run& run) {
    nlohmann::json m;
    m["command"] = run.command();
    m["config"] = run.config().to_json();
    m["version"] = TOPOWG_VERSION;
    m["eigen_version"] = eigen_version();
    m["outputs"] = run.outputs();
    std::ofstream os(run.out() / "manifest.json");
    if (!os) throw ParameterError("cannot write manifest in '" + run.out().string() + "'");
    os << m.dump(2) << '\n';
}

struct Options {
    std::string config_file;
    std::string out = "out";
    int workers = default_workers();
    std::map<std::string, std::string> flags;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Emitter coupled to the end of an SSH waveguide: spectra, dynamics, Fisher information and "
                 "Bayesian estimation of g and delta.\nWorker count defaults to TOPOWG_WORKERS."};
    app.set_version_flag("--version", std::string(TOPOWG_VERSION));
    app.require_subcommand(1);

    std::map<std::string, Options> options;
    for (const auto& name : commands()) {
        auto& o = options[name];
        auto* sub = app.add_subcommand(name, "");
        sub->footer("Outputs:\n" + csv_schema(name));
        sub->add_option("--config", o.config_file, "key = value file or a manifest.json of an earlier run")
            ->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output directory")->capture_default_str();
        sub->add_option("--workers", o.workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
        const Config d = Config::defaults(name);
        for (const auto& k : schema()) {
            const std::string fallback = d.text(k.key);
            sub->add_option_function<std::string>(
                "--" + k.key, [&o, key = k.key](const std::string& v) { o.flags[key] = v; },
                k.help + " [default: " + (fallback.empty() ? "auto" : fallback) + "]");
        }
    }
    app.get_subcommand("bands")->description("energies and bound-state amplitudes");
    app.get_subcommand("dynamics")->description("excited-emitter population P1 with its closed-form approximations");
    app.get_subcommand("fisher")->description("numeric and closed-form Fisher information of the emitter measurement");
    app.get_subcommand("bayes-time")->description("mean squared relative error vs time (W or gamma select noisy data)");
    app.get_subcommand("bayes-range")->description("mean squared relative error vs true value");
    app.get_subcommand("posterior")->description("posterior snapshots at listed times");
    app.get_subcommand("disorder")->description("error vs time for each bond disorder strength in W_list");
    app.get_subcommand("dephasing")->description("error vs time for each dephasing rate in gamma_list");
    app.get_subcommand("finite-size")->description("Fisher information for each chain length in N_list");
    app.get_subcommand("even-n")->description("bands and bayes-time for an even chain");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        error_record("usage", e.what(), 1);
        return 1;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    const Options& o = options.at(command);
    try {
        Config config = Config::defaults(command);
        if (!o.config_file.empty()) config.merge_file(o.config_file);
        for (const auto& [k, v] : o.flags) config.set(k, v);
        Run run(command, config, o.out, o.workers);
        run.log("output directory " + o.out + ", " + std::to_string(run.workers()) + " workers");
        execute(run);
        write_manifest(run);
        run.log("done");
        return 0;
    } catch (const std::exception& e) {
        const auto c = classify(e);
        error_record(c.kind, e.what(), c.exit_code);
        return c.exit_code;
    }
}
