#include "bnmimo/channel.hpp"

#include <cmath>
#include <sstream>

#include "bnmimo/errors.hpp"

namespace bnmimo::channel {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

Rng substream(std::uint64_t master_seed, std::uint64_t trial_index, Stream stream) {
    std::uint64_t k = splitmix64(master_seed);
    k = splitmix64(k ^ trial_index);
    k = splitmix64(k ^ (static_cast<std::uint64_t>(stream) * 0xd1b54a32d192ed03ULL));
    return Rng(k);
}

cplx complex_gaussian(Rng& rng, double variance) {
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

ComplexMatrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols, double variance) {
    ComplexMatrix m(rows, cols);
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    for (auto& z : m.entries()) {
        const double re = n(rng);
        const double im = n(rng);
        z = {re, im};
    }
    return m;
}

void ChannelConfig::validate() const {
    if (nt < 1) throw ValidationError("channel: nt must be >= 1");
    if (nr < nt) {
        std::ostringstream os;
        os << "channel: nr >= nt required (got nt=" << nt << ", nr=" << nr << ")";
        throw ValidationError(os.str());
    }
    if (nt > 16 || nr > 16) throw ValidationError("channel: antenna counts above 16 are not supported");
}

SnrPoint SnrPoint::from_db(double db) {
    if (!std::isfinite(db)) throw ValidationError("snr: dB value must be finite");
    return {std::pow(10.0, db / 10.0), db};
}

SnrPoint SnrPoint::from_linear(double rho) {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ValidationError("snr: rho must be positive and finite");
    return {rho, 10.0 * std::log10(rho)};
}

ChannelRealization sample_channel(const ChannelConfig& cfg, std::uint64_t trial_index) {
    cfg.validate();
    Rng rng = substream(cfg.master_seed, trial_index, Stream::channel);
    ChannelRealization out;
    out.h = gaussian_matrix(rng, static_cast<std::size_t>(cfg.nr), static_cast<std::size_t>(cfg.nt));
    out.svd = linalg::svd(out.h);
    out.trial_index = trial_index;
    return out;
}

} // namespace bnmimo::channel
