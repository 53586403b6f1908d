#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hjblab/convergence.hpp"
#include "hjblab/grid.hpp"
#include "hjblab/initial_condition.hpp"
#include "hjblab/quadratic.hpp"
#include "hjblab/sampling.hpp"
#include "hjblab/spectrum.hpp"
#include "hjblab/storage.hpp"

namespace hjbcli {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Malformed configuration; `key` is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Reads TOML (.toml) or JSON (anything else) into a JSON document.
json load_config(const std::filesystem::path& path);

/// Strict view of one config table: every key must be read before finish().
class Table {
public:
    Table(const json& node, std::string path);

    [[nodiscard]] bool has(const std::string& key) const;
    [[nodiscard]] std::string path_of(const std::string& key) const;

    double number(const std::string& key) const;
    double number(const std::string& key, double fallback) const;
    std::int64_t integer(const std::string& key) const;
    std::int64_t integer(const std::string& key, std::int64_t fallback) const;
    std::size_t count(const std::string& key, std::size_t fallback) const;
    std::uint64_t u64(const std::string& key, std::uint64_t fallback) const;
    bool boolean(const std::string& key, bool fallback) const;
    std::string string(const std::string& key) const;
    std::string string(const std::string& key, const std::string& fallback) const;
    std::vector<double> numbers(const std::string& key) const;
    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const;
    std::vector<std::size_t> counts(const std::string& key) const;
    std::vector<std::string> strings(const std::string& key, std::vector<std::string> fallback) const;
    Table table(const std::string& key) const;
    std::optional<Table> optional_table(const std::string& key) const;
    /// Raw node, marked as read.
    const json& raw(const std::string& key) const;

    /// Rejects keys that were never read.
    void finish() const;

private:
    const json& at(const std::string& key) const;

    const json* node_;
    std::string path_;
    mutable std::set<std::string> seen_;
};

hjb::EigenSpectrum parse_spectrum(const Table& t);
hjb::QuadraticData parse_quadratic_data(const Table& t, const std::string& key);
hjb::Profile1D parse_profile(const Table& t);
hjb::InitialCondition parse_initial_condition(const Table& t, std::optional<std::size_t>* level = nullptr);
hjb::GridSpec parse_grid(const Table& t);
hjb::SampleSpec parse_samples(const Table& t, std::size_t dim, std::uint64_t seed);
hjb::PointRule parse_point_rule(const Table& t);
hjb::MarketConfig parse_market(const Table& t, std::uint64_t seed);

}  // namespace hjbcli
