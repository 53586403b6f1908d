#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "hjblab/parallel.hpp"

#ifndef HJBLAB_VERSION
#define HJBLAB_VERSION "0.0.0"
#endif

namespace {

enum Exit : int { kPass = 0, kAssertion = 1, kConfig = 2, kRuntime = 3 };

struct Options {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

void write_manifest(const std::filesystem::path& dir, const hjbcli::json& m) {
    std::filesystem::create_directories(dir);
    std::ofstream os(dir / "manifest.json", std::ios::binary);
    os << m.dump(2) << '\n';
}

int execute(const std::string& subcommand, const Options& opt) {
    const auto start = std::chrono::steady_clock::now();
    hjbcli::json doc;
    std::string experiment;
    hjbcli::json manifest{{"schema_version", hjbcli::kSchemaVersion}, {"tool", "hjblab"}, {"version", HJBLAB_VERSION}};
    const std::filesystem::path out_dir(opt.out);
    auto finish = [&](int code, bool passed) {
        manifest["passed"] = passed;
        manifest["exit_code"] = code;
        manifest["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        try {
            write_manifest(out_dir, manifest);
        } catch (const std::exception& e) {
            std::cerr << "error: cannot write manifest: " << e.what() << '\n';
            return code == kPass ? static_cast<int>(kRuntime) : code;
        }
        return code;
    };

    try {
        doc = hjbcli::load_config(opt.config);
        if (!doc.is_object()) throw hjbcli::ConfigError("", "top level must be a table");
        const hjbcli::Table root(doc, "");
        if (root.integer("schema_version") != hjbcli::kSchemaVersion) {
            throw hjbcli::ConfigError("schema_version",
                                      "unsupported version (expected " + std::to_string(hjbcli::kSchemaVersion) + ")");
        }
        experiment = root.string("experiment");
        const auto& names = hjbcli::experiment_names();
        if (std::find(names.begin(), names.end(), experiment) == names.end()) {
            throw hjbcli::ConfigError("experiment", "unknown experiment '" + experiment + "'");
        }
        if (subcommand != "run" && subcommand != experiment) {
            throw hjbcli::ConfigError("experiment", "config is for '" + experiment + "' but subcommand is '" +
                                                        subcommand + "'");
        }
        const std::uint64_t seed = opt.seed ? *opt.seed : root.u64("seed", 0);
        const auto threads = root.count("threads", 0);
        if (std::getenv("HJB_THREADS") == nullptr && threads > 0) hjb::set_worker_count(threads);

        manifest["experiment"] = experiment;
        manifest["seed"] = seed;
        manifest["threads"] = hjb::worker_count();
        manifest["config"] = doc;

        hjbcli::Run run{root, out_dir, seed, opt.quiet, {}, hjbcli::json::object()};
        const bool passed = hjbcli::run_experiment(experiment, run);
        manifest["outputs"] = run.outputs;
        manifest["summary"] = run.summary;
        if (!opt.quiet) std::cout << experiment << ": " << (passed ? "PASS" : "FAIL") << '\n';
        return finish(passed ? kPass : kAssertion, passed);
    } catch (const hjbcli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        manifest["error"] = {{"kind", "config"}, {"key", e.key()}, {"message", e.what()}};
        if (!doc.is_null()) manifest["config"] = doc;
        return finish(kConfig, false);
    } catch (const hjbcli::RuntimeFailure& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        manifest["error"] = {{"kind", "runtime"}, {"message", e.what()}};
        return finish(kRuntime, false);
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        manifest["error"] = {{"kind", "runtime"}, {"message", e.what()}};
        return finish(kRuntime, false);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hjblab: HJB experiments on separable Hilbert spaces"};
    app.require_subcommand(1);
    app.set_version_flag("--version", HJBLAB_VERSION);
    Options opt;

    auto add_common = [&opt](CLI::App* sub) {
        sub->add_option("--config", opt.config, "TOML or JSON experiment config")->required();
        sub->add_option("--out", opt.out, "output directory")->capture_default_str();
        sub->add_option("--seed", opt.seed, "override the config seed");
        sub->add_flag("--quiet", opt.quiet, "suppress progress output");
    };
    add_common(app.add_subcommand("run", "run the experiment named in the config"));
    for (const auto& name : hjbcli::experiment_names()) add_common(app.add_subcommand(name, "run the " + name + " experiment"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfig;
    }
    return execute(app.get_subcommands().front()->get_name(), opt);
}
