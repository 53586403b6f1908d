#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "hjblab/expected.hpp"

namespace hjbcli {

/// A library call failed at run time (exit status 3).
class RuntimeFailure : public std::runtime_error {
public:
    explicit RuntimeFailure(const hjb::Error& e) : std::runtime_error(e.describe()) {}
    explicit RuntimeFailure(const std::string& what) : std::runtime_error(what) {}
};

template <typename T>
T need(hjb::Expected<T> e) {
    if (!e) throw RuntimeFailure(e.error());
    return std::move(e).value();
}

/// State of one run: parsed root table, output directory, seed.
struct Run {
    const Table& root;
    std::filesystem::path out_dir;
    std::uint64_t seed = 0;
    bool quiet = false;
    std::vector<std::string> outputs;
    /// Experiment-specific summary echoed into the manifest.
    json summary = json::object();

    /// Call once every config key has been read: rejects unknown top-level keys.
    void config_done() const { root.finish(); }
    /// Writes `content` to out_dir/name and records it as an output.
    void write(const std::string& name, const std::string& content);
    /// Progress line on stdout unless --quiet.
    void say(const std::string& line) const;
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"spectrum-check", "riccati",  "lax-oleinik", "solve-fd",
                                                "verify",         "converge", "storage-sim"};
    return names;
}

/// Runs the named experiment; returns true iff every assertion passed.
bool run_experiment(const std::string& name, Run& run);

}  // namespace hjbcli
