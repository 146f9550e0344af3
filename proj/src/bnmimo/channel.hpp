#pragma once

#include <cstdint>
#include <random>

#include "bnmimo/linalg.hpp"

namespace bnmimo::channel {

using linalg::ComplexMatrix;
using linalg::cplx;

/// Random engine used for every per-trial substream.
using Rng = std::mt19937_64;

/// Independent substreams that share a (master_seed, trial_index) counter.
enum class Stream : std::uint64_t {
    channel = 0, // fading matrix; shared by every scheme compared on a trial
    payload = 1, // information bits
    noise = 2,   // receiver noise, drawn at unit variance and scaled per SNR point
    oracle = 3,  // test and self-test instance generation
};

/// Deterministic engine for one (seed, trial, stream) triple. Any trial can be
/// replayed in isolation and trials can be processed in any order.
Rng substream(std::uint64_t master_seed, std::uint64_t trial_index, Stream stream);

/// CN(0, variance): real and imaginary parts each carry variance / 2.
cplx complex_gaussian(Rng& rng, double variance = 1.0);

ComplexMatrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols, double variance = 1.0);

struct ChannelConfig {
    int nt = 1;
    int nr = 1;
    std::uint64_t master_seed = 1;

    /// Throws ValidationError unless nr >= nt >= 1.
    void validate() const;
};

struct ChannelRealization {
    ComplexMatrix h; // nr x nt
    linalg::SvdResult svd;
    std::uint64_t trial_index = 0;
};

struct SnrPoint {
    double rho = 1.0;
    double rho_db = 0.0;

    static SnrPoint from_db(double db);
    static SnrPoint from_linear(double rho);
};

/// i.i.d. Rayleigh flat-fading draw for one trial, with its SVD.
ChannelRealization sample_channel(const ChannelConfig& cfg, std::uint64_t trial_index);

} // namespace bnmimo::channel
