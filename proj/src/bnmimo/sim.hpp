#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bnmimo/channel.hpp"
#include "bnmimo/link.hpp"
#include "bnmimo/schemes.hpp"

namespace bnmimo::sim {

/// How trials are spread over threads. Results never depend on `workers`:
/// trials are processed in fixed-size batches and reduced in trial order.
struct Execution {
    int workers = 1;
    std::size_t batch_trials = 0; // 0: 256 for capacity, 64 for BER

    void validate() const;
};

/// Calls body(i) for every i in [0, count) using `workers` threads with a
/// strided split. Rethrows the first exception in index order.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

/// Inclusive dB grid start, start + step, ... <= stop (with a 1e-9 slack).
std::vector<double> db_grid(double start_db, double stop_db, double step_db);

/// Running mean and variance (Welford), fed in trial order.
class RunningStats {
public:
    void add(double x);
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const; // sample variance, 0 for n < 2
    double stderr_of_mean() const;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// ---------------------------------------------------------------------------
// Capacity

struct CapacityRequest {
    channel::ChannelConfig channel;
    std::vector<schemes::SchemeSpec> schemes;
    std::vector<double> rho_db;
    std::size_t trials = 1000;
    /// Draw a separate channel sequence per scheme instead of sharing draws.
    bool independent_streams = false;

    void validate() const;
};

struct CapacityCurve {
    schemes::SchemeSpec scheme;
    std::vector<double> rho_db;
    std::vector<double> mean_bits;
    std::vector<double> stderr_bits;
    /// Mean of dC/drho in nats per unit of linear SNR.
    std::vector<double> mean_slope;
    std::size_t trials = 0;
    std::uint64_t master_seed = 0;
};

struct CapacityResult {
    std::vector<CapacityCurve> curves;
    /// pair_stderr[a][b][p]: standard error of the per-trial difference
    /// between curves a and b at grid point p (smaller than the independent
    /// combination when draws are shared).
    std::vector<std::vector<std::vector<double>>> pair_stderr;

    std::size_t index_of(const std::string& scheme_name) const;
};

CapacityResult estimate_capacity(const CapacityRequest& req, const Execution& exec = {});

// ---------------------------------------------------------------------------
// Crossovers and regions

struct Crossing {
    double rho_db = 0.0;
    /// Difference at a bracketing grid point within two standard errors of 0.
    bool low_confidence = false;
};

struct CrossoverReport {
    std::vector<Crossing> crossings;
    bool multiple() const { return crossings.size() > 1; }
    bool empty() const { return crossings.empty(); }
};

/// Sign changes of diff = a - b by linear interpolation on the grid.
CrossoverReport detect_crossover(std::span<const double> rho_db, std::span<const double> diff,
                                 std::span<const double> diff_stderr);
/// Convenience for two curves with independent errors.
CrossoverReport detect_crossover(const CapacityCurve& a, const CapacityCurve& b);

struct Region {
    std::size_t curve = 0; // index into the candidate list
    double from_db = 0.0;  // -inf / +inf at the open ends
    double to_db = 0.0;
};

/// Which curve has the largest mean on each part of the grid; boundaries are
/// the interpolated crossings of the two curves that swap the lead.
std::vector<Region> best_regions(const CapacityResult& result, std::span<const std::size_t> candidates);

// ---------------------------------------------------------------------------
// BER

struct StoppingRule {
    std::uint64_t min_errors = 200;
    std::uint64_t max_bits = 100'000'000;

    void validate() const;
};

struct BerRequest {
    channel::ChannelConfig channel;
    std::vector<double> rho_db;
    StoppingRule stopping;
    int blocks_per_trial = 4;
    bool independent_streams = false;

    void validate() const;
};

struct BerPoint {
    double rho_db = 0.0;
    std::uint64_t errors = 0;
    std::uint64_t bits = 0;
    std::uint64_t trials = 0;
    double ber = 0.0;
    double stderr_ber = 0.0;
    /// Stopped on the bit budget before reaching min_errors.
    bool capped = false;
};

struct BerCurve {
    std::string system;
    std::string constellation;
    double rate = 0.0;
    std::vector<BerPoint> points;
    std::uint64_t master_seed = 0;
};

BerCurve simulate_ber(const link::ResolvedSystem& sys, const BerRequest& req, const Execution& exec = {});

struct AnalyticPoint {
    double rho_db = 0.0;
    double ber = 0.0;
    double stderr_ber = 0.0;
};

struct AnalyticCurve {
    std::string system;
    std::string constellation;
    std::vector<AnalyticPoint> points;
    std::size_t trials = 0;
    std::uint64_t master_seed = 0;
};

/// Channel-averaged closed-form BER: for each draw, the kernel at each
/// symbol's post-detection SINR, averaged over symbols, then over draws.
/// Linear receivers only (MMSE, matched filter).
AnalyticCurve ber_average_analytic(const link::ResolvedSystem& sys, const channel::ChannelConfig& cfg,
                                   std::span<const double> rho_db, std::size_t trials, const Execution& exec = {},
                                   bool independent_streams = false);

/// Seed actually used for a system when streams are not shared.
std::uint64_t system_seed(std::uint64_t master_seed, const std::string& name, bool independent);

} // namespace bnmimo::sim
