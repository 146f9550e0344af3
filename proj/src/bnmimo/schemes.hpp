#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bnmimo/channel.hpp"
#include "bnmimo/linalg.hpp"

namespace bnmimo::schemes {

using linalg::ComplexMatrix;

enum class SchemeKind {
    equal_power,
    water_filling,
    beamforming,
    beam_nulling,
    md_beamforming,
    md_beam_nulling,
};

/// Adaptation scheme. `k` is the number of fed-back eigenvectors.
struct SchemeSpec {
    SchemeKind kind = SchemeKind::equal_power;
    int k = 1;
    double total_power = 1.0;

    /// Accepts eq, wf, bf, bn, mdbf<k>, mdbn<k> (case-insensitive).
    static SchemeSpec parse(std::string_view token);
    std::string name() const;

    /// Throws ValidationError if the scheme cannot be used with `nt` transmit
    /// antennas: MD kinds need 1 <= k <= floor(nt/2), and at least one stream
    /// must remain.
    void validate(int nt) const;

    /// Transmitted streams; for water-filling this is the upper bound nt.
    int streams(int nt) const;

    friend bool operator==(const SchemeSpec&, const SchemeSpec&) = default;
};

struct PowerAllocation {
    std::vector<double> per_subchannel;
};

struct EffectiveChannel {
    ComplexMatrix matrix; // nr x streams, power scaling included
    std::size_t streams = 0;
    double noise_var = 1.0;
};

// Instantaneous capacities in bits per channel use. `sigma` holds the
// singular values in descending order.
double capacity_equal(std::span<const double> sigma, double rho, int nt);
double capacity_wf(std::span<const double> sigma, double total_power, double noise_var);
double capacity_bf(std::span<const double> sigma, double rho);
double capacity_bn(std::span<const double> sigma, double rho, int nt);
double capacity_md_bf(std::span<const double> sigma, double rho, int k);
/// k = 0 is accepted here and reduces to equal power.
double capacity_md_bn(std::span<const double> sigma, double rho, int nt, int k);

/// Capacity of any scheme in nats per channel use, with P = spec.total_power
/// and noise variance P / rho.
double capacity_nats(const SchemeSpec& spec, std::span<const double> sigma, double rho, int nt);

/// Analytic d C / d rho in nats for one realization. Water-filling is not
/// covered (its derivative is piecewise); use slope_curve on sampled values.
double capacity_slope(const SchemeSpec& spec, std::span<const double> sigma, double rho, int nt);

/// Water-filling by active-set elimination: P_i = max(0, mu - noise/lambda_i^2)
/// with sum P_i = total_power. Terminates in at most sigma.size() passes.
PowerAllocation waterfill(std::span<const double> sigma, double total_power, double noise_var);

/// max over subchannels of the KKT violation of an allocation.
double waterfill_kkt_residual(std::span<const double> sigma, const PowerAllocation& alloc,
                              double total_power, double noise_var);

/// Transmit precoder F (nt x streams), power scaling included, so that the
/// effective channel is H F.
ComplexMatrix precoder(const SchemeSpec& spec, const linalg::SvdResult& svd, double noise_var);

EffectiveChannel build_effective_channel(const SchemeSpec& spec, const channel::ChannelRealization& chan,
                                         double noise_var);

/// Derivative of capacity samples (nats) on a uniform linear-rho grid:
/// central differences inside, one-sided at the ends.
std::vector<double> slope_curve(std::span<const double> capacity_nats, double rho_step);

} // namespace bnmimo::schemes
