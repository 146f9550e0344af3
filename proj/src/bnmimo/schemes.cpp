#include "bnmimo/schemes.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bnmimo/errors.hpp"

namespace bnmimo::schemes {

namespace {

// Sum over the first `count` subchannels of log(1 + (rho / share) lambda^2).
double equal_split_nats(std::span<const double> sigma, double rho, int count, int share) {
    if (count > static_cast<int>(sigma.size())) throw ValidationError("capacity: more streams than subchannels");
    double c = 0.0;
    const double g = rho / static_cast<double>(share);
    for (int i = 0; i < count; ++i) c += std::log1p(g * sigma[i] * sigma[i]);
    return c;
}

double equal_split_slope(std::span<const double> sigma, double rho, int count, int share) {
    double s = 0.0;
    for (int i = 0; i < count; ++i) {
        const double l2 = sigma[i] * sigma[i];
        if (l2 > 0.0) s += 1.0 / (rho + static_cast<double>(share) / l2);
    }
    return s;
}

void require_sigma(std::span<const double> sigma) {
    if (sigma.empty()) throw ValidationError("capacity: empty singular-value list");
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        if (!(sigma[i] >= 0.0) || !std::isfinite(sigma[i]))
            throw ValidationError("capacity: singular values must be finite and non-negative");
        if (i > 0 && sigma[i] > sigma[i - 1]) throw ValidationError("capacity: singular values must be descending");
    }
}

void require_rho(double rho) {
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw ValidationError("capacity: rho must be finite and >= 0");
}

constexpr double kLn2 = std::numbers::ln2;

} // namespace

// ---------------------------------------------------------------------------
// SchemeSpec

SchemeSpec SchemeSpec::parse(std::string_view token) {
    std::string t(token);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    t.erase(std::remove(t.begin(), t.end(), '-'), t.end());
    SchemeSpec s;
    if (t == "eq") return s;
    if (t == "wf") return {SchemeKind::water_filling, 1, 1.0};
    if (t == "bf") return {SchemeKind::beamforming, 1, 1.0};
    if (t == "bn") return {SchemeKind::beam_nulling, 1, 1.0};
    for (const auto& [prefix, kind] : {std::pair{"mdbf", SchemeKind::md_beamforming},
                                       std::pair{"mdbn", SchemeKind::md_beam_nulling}}) {
        const std::string_view p(prefix);
        if (t.size() > p.size() && t.compare(0, p.size(), p) == 0) {
            int k = 0;
            const char* first = t.data() + p.size();
            const char* last = t.data() + t.size();
            auto [ptr, ec] = std::from_chars(first, last, k);
            if (ec == std::errc{} && ptr == last) return {kind, k, 1.0};
        }
    }
    throw ValidationError("unknown scheme '" + std::string(token) + "' (expected eq, wf, bf, bn, mdbf<k>, mdbn<k>)");
}

std::string SchemeSpec::name() const {
    switch (kind) {
    case SchemeKind::equal_power: return "eq";
    case SchemeKind::water_filling: return "wf";
    case SchemeKind::beamforming: return "bf";
    case SchemeKind::beam_nulling: return "bn";
    case SchemeKind::md_beamforming: return "mdbf" + std::to_string(k);
    case SchemeKind::md_beam_nulling: return "mdbn" + std::to_string(k);
    }
    return "?";
}

void SchemeSpec::validate(int nt) const {
    if (!(total_power > 0.0) || !std::isfinite(total_power))
        throw ValidationError("scheme " + name() + ": total power must be positive");
    if (nt < 1) throw ValidationError("scheme " + name() + ": nt must be >= 1");
    switch (kind) {
    case SchemeKind::equal_power:
    case SchemeKind::water_filling:
    case SchemeKind::beamforming: return;
    case SchemeKind::beam_nulling:
        if (nt < 2) throw ValidationError("scheme bn: needs nt >= 2 (no stream left after nulling)");
        return;
    case SchemeKind::md_beamforming:
    case SchemeKind::md_beam_nulling:
        if (k < 1 || k > nt / 2) {
            std::ostringstream os;
            os << "scheme " << name() << ": k must satisfy 1 <= k <= floor(nt/2) = " << nt / 2;
            throw ValidationError(os.str());
        }
        if (kind == SchemeKind::md_beam_nulling && nt - k < 1)
            throw ValidationError("scheme " + name() + ": no stream left after nulling");
        return;
    }
}

int SchemeSpec::streams(int nt) const {
    switch (kind) {
    case SchemeKind::equal_power:
    case SchemeKind::water_filling: return nt;
    case SchemeKind::beamforming: return 1;
    case SchemeKind::beam_nulling: return nt - 1;
    case SchemeKind::md_beamforming: return k;
    case SchemeKind::md_beam_nulling: return nt - k;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// Capacities

double capacity_equal(std::span<const double> sigma, double rho, int nt) {
    require_sigma(sigma);
    require_rho(rho);
    return equal_split_nats(sigma, rho, nt, nt) / kLn2;
}

double capacity_bf(std::span<const double> sigma, double rho) {
    require_sigma(sigma);
    require_rho(rho);
    return equal_split_nats(sigma, rho, 1, 1) / kLn2;
}

double capacity_bn(std::span<const double> sigma, double rho, int nt) {
    require_sigma(sigma);
    require_rho(rho);
    if (nt < 2) throw ValidationError("capacity_bn: needs nt >= 2");
    return equal_split_nats(sigma, rho, nt - 1, nt - 1) / kLn2;
}

double capacity_md_bf(std::span<const double> sigma, double rho, int k) {
    require_sigma(sigma);
    require_rho(rho);
    if (k < 1) throw ValidationError("capacity_md_bf: k must be >= 1");
    return equal_split_nats(sigma, rho, k, k) / kLn2;
}

double capacity_md_bn(std::span<const double> sigma, double rho, int nt, int k) {
    require_sigma(sigma);
    require_rho(rho);
    if (k < 0 || nt - k < 1) throw ValidationError("capacity_md_bn: requires 0 <= k < nt");
    return equal_split_nats(sigma, rho, nt - k, nt - k) / kLn2;
}

PowerAllocation waterfill(std::span<const double> sigma, double total_power, double noise_var) {
    require_sigma(sigma);
    if (!(total_power > 0.0) || !(noise_var > 0.0)) throw ValidationError("waterfill: power and noise must be positive");
    if (sigma.front() <= 0.0) throw ValidationError("waterfill: all singular values are zero");

    const std::size_t n = sigma.size();
    std::vector<bool> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = sigma[i] > 0.0;

    PowerAllocation out;
    out.per_subchannel.assign(n, 0.0);
    for (std::size_t pass = 0; pass <= n; ++pass) {
        double inv_sum = 0.0;
        std::size_t m = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (active[i]) {
                inv_sum += noise_var / (sigma[i] * sigma[i]);
                ++m;
            }
        const double mu = (total_power + inv_sum) / static_cast<double>(m);
        bool dropped = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            if (mu - noise_var / (sigma[i] * sigma[i]) < 0.0) {
                active[i] = false;
                dropped = true;
            }
        }
        if (!dropped) {
            for (std::size_t i = 0; i < n; ++i)
                out.per_subchannel[i] = active[i] ? mu - noise_var / (sigma[i] * sigma[i]) : 0.0;
            return out;
        }
    }
    throw NumericalError("waterfill: active set did not stabilise");
}

double waterfill_kkt_residual(std::span<const double> sigma, const PowerAllocation& alloc, double total_power,
                              double noise_var) {
    const auto& p = alloc.per_subchannel;
    double sum = 0.0;
    double mu = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        sum += p[i];
        if (p[i] > 0.0) {
            mu += p[i] + noise_var / (sigma[i] * sigma[i]);
            ++m;
        }
    }
    if (m == 0) return INFINITY;
    mu /= static_cast<double>(m);
    double r = std::abs(sum - total_power) / total_power;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < 0.0) r = std::max(r, -p[i] / total_power);
        const double floor = sigma[i] > 0.0 ? noise_var / (sigma[i] * sigma[i]) : INFINITY;
        if (p[i] > 0.0)
            r = std::max(r, std::abs(mu - floor - p[i]) / total_power);
        else
            r = std::max(r, std::max(0.0, mu - floor) / total_power);
    }
    return r;
}

double capacity_wf(std::span<const double> sigma, double total_power, double noise_var) {
    const PowerAllocation a = waterfill(sigma, total_power, noise_var);
    double c = 0.0;
    for (std::size_t i = 0; i < sigma.size(); ++i)
        c += std::log1p(a.per_subchannel[i] * sigma[i] * sigma[i] / noise_var);
    return c / kLn2;
}

double capacity_nats(const SchemeSpec& spec, std::span<const double> sigma, double rho, int nt) {
    require_rho(rho);
    switch (spec.kind) {
    case SchemeKind::equal_power: return equal_split_nats(sigma, rho, nt, nt);
    case SchemeKind::water_filling:
        if (rho == 0.0) return 0.0;
        return capacity_wf(sigma, spec.total_power, spec.total_power / rho) * kLn2;
    case SchemeKind::beamforming: return equal_split_nats(sigma, rho, 1, 1);
    case SchemeKind::beam_nulling: return equal_split_nats(sigma, rho, nt - 1, nt - 1);
    case SchemeKind::md_beamforming: return equal_split_nats(sigma, rho, spec.k, spec.k);
    case SchemeKind::md_beam_nulling: return equal_split_nats(sigma, rho, nt - spec.k, nt - spec.k);
    }
    return 0.0;
}

double capacity_slope(const SchemeSpec& spec, std::span<const double> sigma, double rho, int nt) {
    switch (spec.kind) {
    case SchemeKind::equal_power: return equal_split_slope(sigma, rho, nt, nt);
    case SchemeKind::beamforming: return equal_split_slope(sigma, rho, 1, 1);
    case SchemeKind::beam_nulling: return equal_split_slope(sigma, rho, nt - 1, nt - 1);
    case SchemeKind::md_beamforming: return equal_split_slope(sigma, rho, spec.k, spec.k);
    case SchemeKind::md_beam_nulling: return equal_split_slope(sigma, rho, nt - spec.k, nt - spec.k);
    case SchemeKind::water_filling: break;
    }
    throw ValidationError("capacity_slope: no closed form for water-filling");
}

std::vector<double> slope_curve(std::span<const double> c, double rho_step) {
    if (c.size() < 3) throw ValidationError("slope_curve: need at least 3 grid points");
    if (!(rho_step > 0.0)) throw ValidationError("slope_curve: grid step must be positive");
    const std::size_t n = c.size();
    std::vector<double> d(n);
    d[0] = (-3.0 * c[0] + 4.0 * c[1] - c[2]) / (2.0 * rho_step);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (c[i + 1] - c[i - 1]) / (2.0 * rho_step);
    d[n - 1] = (3.0 * c[n - 1] - 4.0 * c[n - 2] + c[n - 3]) / (2.0 * rho_step);
    return d;
}

// ---------------------------------------------------------------------------
// Precoders

ComplexMatrix precoder(const SchemeSpec& spec, const linalg::SvdResult& svd, double noise_var) {
    const int nt = static_cast<int>(svd.v.rows());
    spec.validate(nt);
    const double p = spec.total_power;
    const auto scaled = [](ComplexMatrix m, double power_per_stream) {
        m *= std::sqrt(power_per_stream);
        return m;
    };

    switch (spec.kind) {
    case SchemeKind::equal_power: return scaled(ComplexMatrix::identity(nt), p / nt);
    case SchemeKind::beamforming: return scaled(svd.v.columns(0, 1), p);
    case SchemeKind::md_beamforming: return scaled(svd.v.columns(0, spec.k), p / spec.k);
    case SchemeKind::beam_nulling:
    case SchemeKind::md_beam_nulling: {
        const int k = spec.kind == SchemeKind::beam_nulling ? 1 : spec.k;
        const ComplexMatrix weakest = svd.v.columns(nt - k, k);
        return scaled(linalg::orthonormal_complement(weakest), p / (nt - k));
    }
    case SchemeKind::water_filling: {
        if (!(noise_var > 0.0)) throw ValidationError("precoder wf: noise variance must be positive");
        const PowerAllocation a = waterfill(svd.sigma, p, noise_var);
        std::vector<std::size_t> act;
        for (std::size_t i = 0; i < a.per_subchannel.size(); ++i)
            if (a.per_subchannel[i] > 0.0) act.push_back(i);
        ComplexMatrix f = svd.v.select_columns(act);
        for (std::size_t j = 0; j < act.size(); ++j) {
            const double g = std::sqrt(a.per_subchannel[act[j]]);
            for (std::size_t i = 0; i < f.rows(); ++i) f(i, j) *= g;
        }
        return f;
    }
    }
    throw ValidationError("precoder: unknown scheme");
}

EffectiveChannel build_effective_channel(const SchemeSpec& spec, const channel::ChannelRealization& chan,
                                         double noise_var) {
    if (chan.h.cols() != chan.svd.v.rows() || chan.h.rows() != chan.svd.u.rows())
        throw ValidationError("build_effective_channel: SVD does not match channel dimensions");
    if (!(noise_var > 0.0)) throw ValidationError("build_effective_channel: noise variance must be positive");
    EffectiveChannel e;
    e.matrix = chan.h * precoder(spec, chan.svd, noise_var);
    e.streams = e.matrix.cols();
    e.noise_var = noise_var;
    return e;
}

} // namespace bnmimo::schemes
