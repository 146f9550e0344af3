#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bnmimo/sim.hpp"

namespace bnmimo::app {

/// Fully resolved description of one run. Everything except `workers` is
/// embedded in every output file, so an output can be fed back as a config.
struct RunConfig {
    std::string kind = "capacity"; // capacity | ber
    std::string preset;            // informational
    bool compare = false;          // add crossover / region analysis

    int nt = 4;
    int nr = 4;
    std::vector<std::string> schemes{"eq", "wf", "bf", "bn"};
    std::vector<std::string> systems;
    int rate = 0;              // bits per channel use; 0 when `constellation` is given
    std::string constellation; // explicit constellation for every system

    double snr_start_db = 0.0;
    double snr_stop_db = 20.0;
    double snr_step_db = 2.0;

    std::uint64_t trials = 10000; // capacity draws, or analytic-BER draws
    std::uint64_t min_errors = 200;
    std::uint64_t max_bits = 100'000'000;
    int blocks_per_trial = 8;
    std::uint64_t batch_trials = 0; // 0: engine default
    bool analytic = false;
    bool independent_streams = false;
    std::uint64_t seed = 1;

    int workers = 1; // not embedded

    /// key=value assignment; unknown keys and malformed values throw ValidationError.
    void set(const std::string& key, const std::string& value);
    /// Lines "key=value" for every embedded key, in a fixed order.
    std::string to_text() const;
    std::vector<std::pair<std::string, std::string>> entries() const;

    void validate() const;
    std::vector<double> grid() const;
};

/// Accepts a flat key=value file, a CSV output ("#config key=value" lines) or
/// a JSON output (its "config" object) and applies it on top of `cfg`.
void load_config_text(RunConfig& cfg, const std::string& text);
void load_config_file(RunConfig& cfg, const std::string& path);

std::vector<std::string> preset_names();
std::string preset_description(const std::string& name);
/// Overwrites the preset's keys in `cfg` (other keys keep their values).
void apply_preset(RunConfig& cfg, const std::string& name);

struct PairCrossing {
    std::string a;
    std::string b;
    sim::Crossing crossing;
};

struct NamedRegion {
    std::string name;
    double from_db = 0.0;
    double to_db = 0.0;
};

struct RunResult {
    RunConfig config;
    std::optional<sim::CapacityResult> capacity;
    std::vector<sim::BerCurve> ber;
    std::vector<sim::AnalyticCurve> analytic;
    std::vector<PairCrossing> crossings;
    std::vector<NamedRegion> regions;
};

RunResult execute(const RunConfig& cfg);

/// Writes the combined file at `path` plus one file per curve next to it
/// (<stem>.<curve>.<ext>). Returns every path written.
std::vector<std::string> write_outputs(const RunResult& r, const std::string& path, const std::string& format);

std::string render_csv(const RunResult& r);
std::string render_json(const RunResult& r);
/// Human-readable digest for terminals.
std::string summary(const RunResult& r);

} // namespace bnmimo::app
