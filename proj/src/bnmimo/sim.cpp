#include "bnmimo/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <thread>

#include "bnmimo/errors.hpp"

namespace bnmimo::sim {

using linalg::ComplexMatrix;

namespace {

constexpr std::size_t kCapacityBatch = 256;
constexpr std::size_t kBerBatch = 64;

std::size_t batch_size(const Execution& exec, std::size_t fallback) {
    return exec.batch_trials == 0 ? fallback : exec.batch_trials;
}

double rho_of(double db) { return channel::SnrPoint::from_db(db).rho; }

void require_grid(std::span<const double> rho_db) {
    if (rho_db.empty()) throw ValidationError("SNR grid is empty");
    for (const double v : rho_db)
        if (!std::isfinite(v)) throw ValidationError("SNR grid contains a non-finite value");
}

double slope_nats(const schemes::SchemeSpec& spec, std::span<const double> sigma, double rho, int nt) {
    if (spec.kind != schemes::SchemeKind::water_filling) return schemes::capacity_slope(spec, sigma, rho, nt);
    // Water-filling capacity is only piecewise smooth; a small symmetric step
    // is enough away from the activation thresholds.
    const double h = 1e-4 * rho;
    return (schemes::capacity_nats(spec, sigma, rho + h, nt) - schemes::capacity_nats(spec, sigma, rho - h, nt)) / (2.0 * h);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace

void Execution::validate() const {
    if (workers < 1 || workers > 256) throw ValidationError("workers must be between 1 and 256");
    if (batch_trials > 1'000'000) throw ValidationError("batch_trials must be at most 1000000");
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body) {
    const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count);
    if (w <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(w);
    std::vector<std::size_t> error_index(w, std::numeric_limits<std::size_t>::max());
    {
        std::vector<std::jthread> pool;
        pool.reserve(w);
        for (std::size_t k = 0; k < w; ++k)
            pool.emplace_back([&, k] {
                for (std::size_t i = k; i < count; i += w) {
                    try {
                        body(i);
                    } catch (...) {
                        errors[k] = std::current_exception();
                        error_index[k] = i;
                        return;
                    }
                }
            });
    }
    std::size_t first = w;
    for (std::size_t k = 0; k < w; ++k)
        if (errors[k] && (first == w || error_index[k] < error_index[first])) first = k;
    if (first != w) std::rethrow_exception(errors[first]);
}

std::vector<double> db_grid(double start_db, double stop_db, double step_db) {
    if (!std::isfinite(start_db) || !std::isfinite(stop_db) || !std::isfinite(step_db))
        throw ValidationError("SNR range must be finite");
    if (!(step_db > 0.0)) throw ValidationError("SNR step must be positive");
    if (stop_db < start_db) throw ValidationError("SNR stop must not be below SNR start (empty grid)");
    const auto n = static_cast<std::size_t>(std::floor((stop_db - start_db) / step_db + 1e-9)) + 1;
    if (n > 10000) throw ValidationError("SNR grid has more than 10000 points");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = start_db + static_cast<double>(i) * step_db;
    return g;
}

void RunningStats::add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
}

double RunningStats::variance() const { return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1); }

double RunningStats::stderr_of_mean() const {
    return n_ == 0 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_));
}

std::uint64_t system_seed(std::uint64_t master_seed, const std::string& name, bool independent) {
    if (!independent) return master_seed;
    std::uint64_t z = master_seed ^ fnv1a(name);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Capacity

void CapacityRequest::validate() const {
    channel.validate();
    if (schemes.empty()) throw ValidationError("capacity: no schemes given");
    for (const auto& s : schemes) s.validate(channel.nt);
    require_grid(rho_db);
    if (trials < 100) throw ValidationError("capacity: at least 100 trials are required");
}

std::size_t CapacityResult::index_of(const std::string& scheme_name) const {
    for (std::size_t i = 0; i < curves.size(); ++i)
        if (curves[i].scheme.name() == scheme_name) return i;
    throw ValidationError("no capacity curve for scheme '" + scheme_name + "'");
}

CapacityResult estimate_capacity(const CapacityRequest& req, const Execution& exec) {
    req.validate();
    exec.validate();
    const std::size_t ns = req.schemes.size();
    const std::size_t np = req.rho_db.size();
    const int nt = req.channel.nt;
    std::vector<double> rho(np);
    for (std::size_t p = 0; p < np; ++p) rho[p] = rho_of(req.rho_db[p]);

    std::vector<channel::ChannelConfig> cfgs(ns, req.channel);
    for (std::size_t s = 0; s < ns; ++s)
        cfgs[s].master_seed = system_seed(req.channel.master_seed, req.schemes[s].name(), req.independent_streams);

    std::vector<RunningStats> cap(ns * np), slope(ns * np), diff(ns * ns * np);
    const std::size_t batch = batch_size(exec, kCapacityBatch);
    std::vector<double> cap_buf, slope_buf;

    for (std::size_t start = 0; start < req.trials; start += batch) {
        const std::size_t count = std::min(batch, req.trials - start);
        cap_buf.assign(count * ns * np, 0.0);
        slope_buf.assign(count * ns * np, 0.0);
        parallel_for(count, exec.workers, [&](std::size_t i) {
            const std::uint64_t trial = start + i;
            std::optional<channel::ChannelRealization> shared;
            for (std::size_t s = 0; s < ns; ++s) {
                std::optional<channel::ChannelRealization> own;
                const channel::ChannelRealization* chan = nullptr;
                if (req.independent_streams) {
                    own = channel::sample_channel(cfgs[s], trial);
                    chan = &*own;
                } else {
                    if (!shared) shared = channel::sample_channel(req.channel, trial);
                    chan = &*shared;
                }
                for (std::size_t p = 0; p < np; ++p) {
                    const std::size_t at = (i * ns + s) * np + p;
                    cap_buf[at] = schemes::capacity_nats(req.schemes[s], chan->svd.sigma, rho[p], nt) / std::numbers::ln2;
                    slope_buf[at] = slope_nats(req.schemes[s], chan->svd.sigma, rho[p], nt);
                }
            }
        });
        for (std::size_t i = 0; i < count; ++i)
            for (std::size_t s = 0; s < ns; ++s)
                for (std::size_t p = 0; p < np; ++p) {
                    const std::size_t at = (i * ns + s) * np + p;
                    cap[s * np + p].add(cap_buf[at]);
                    slope[s * np + p].add(slope_buf[at]);
                    for (std::size_t b = s + 1; b < ns; ++b)
                        diff[(s * ns + b) * np + p].add(cap_buf[at] - cap_buf[(i * ns + b) * np + p]);
                }
    }

    CapacityResult out;
    out.curves.resize(ns);
    out.pair_stderr.assign(ns, std::vector<std::vector<double>>(ns, std::vector<double>(np, 0.0)));
    for (std::size_t s = 0; s < ns; ++s) {
        CapacityCurve& c = out.curves[s];
        c.scheme = req.schemes[s];
        c.rho_db = req.rho_db;
        c.trials = req.trials;
        c.master_seed = req.channel.master_seed;
        for (std::size_t p = 0; p < np; ++p) {
            c.mean_bits.push_back(cap[s * np + p].mean());
            c.stderr_bits.push_back(cap[s * np + p].stderr_of_mean());
            c.mean_slope.push_back(slope[s * np + p].mean());
        }
        for (std::size_t b = s + 1; b < ns; ++b)
            for (std::size_t p = 0; p < np; ++p) {
                const double se = diff[(s * ns + b) * np + p].stderr_of_mean();
                out.pair_stderr[s][b][p] = se;
                out.pair_stderr[b][s][p] = se;
            }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Crossovers

CrossoverReport detect_crossover(std::span<const double> rho_db, std::span<const double> diff,
                                 std::span<const double> diff_stderr) {
    if (rho_db.size() != diff.size() || diff.size() != diff_stderr.size())
        throw ValidationError("detect_crossover: curves must share the grid");
    CrossoverReport report;
    std::size_t last = diff.size(); // last index with a non-zero difference
    for (std::size_t i = 0; i < diff.size(); ++i) {
        if (diff[i] == 0.0) continue;
        if (last != diff.size() && (diff[last] > 0.0) != (diff[i] > 0.0)) {
            const double t = diff[last] / (diff[last] - diff[i]);
            Crossing c;
            c.rho_db = rho_db[last] + t * (rho_db[i] - rho_db[last]);
            c.low_confidence = std::abs(diff[last]) < 2.0 * diff_stderr[last] || std::abs(diff[i]) < 2.0 * diff_stderr[i];
            report.crossings.push_back(c);
        }
        last = i;
    }
    return report;
}

CrossoverReport detect_crossover(const CapacityCurve& a, const CapacityCurve& b) {
    if (a.rho_db != b.rho_db) throw ValidationError("detect_crossover: curves must share the grid");
    std::vector<double> d(a.rho_db.size()), se(a.rho_db.size());
    for (std::size_t p = 0; p < d.size(); ++p) {
        d[p] = a.mean_bits[p] - b.mean_bits[p];
        se[p] = std::hypot(a.stderr_bits[p], b.stderr_bits[p]);
    }
    return detect_crossover(a.rho_db, d, se);
}

std::vector<Region> best_regions(const CapacityResult& result, std::span<const std::size_t> candidates) {
    if (candidates.empty()) throw ValidationError("best_regions: no candidate curves");
    for (const std::size_t c : candidates)
        if (c >= result.curves.size()) throw ValidationError("best_regions: candidate index out of range");
    const auto& grid = result.curves[candidates[0]].rho_db;
    const auto leader = [&](std::size_t p) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < candidates.size(); ++j)
            if (result.curves[candidates[j]].mean_bits[p] > result.curves[candidates[best]].mean_bits[p]) best = j;
        return best;
    };

    std::vector<Region> regions;
    Region cur{leader(0), -std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t p = 1; p < grid.size(); ++p) {
        const std::size_t next = leader(p);
        if (next == cur.curve) continue;
        const auto& a = result.curves[candidates[cur.curve]].mean_bits;
        const auto& b = result.curves[candidates[next]].mean_bits;
        const double d0 = a[p - 1] - b[p - 1];
        const double d1 = a[p] - b[p];
        const double t = d0 == d1 ? 0.5 : d0 / (d0 - d1);
        const double x = grid[p - 1] + std::clamp(t, 0.0, 1.0) * (grid[p] - grid[p - 1]);
        cur.to_db = x;
        regions.push_back(cur);
        cur = Region{next, x, 0.0};
    }
    cur.to_db = std::numeric_limits<double>::infinity();
    regions.push_back(cur);
    return regions;
}

// ---------------------------------------------------------------------------
// BER

void StoppingRule::validate() const {
    if (min_errors < 1) throw ValidationError("min_errors must be at least 1");
    if (max_bits < 1) throw ValidationError("max_bits must be at least 1");
}

void BerRequest::validate() const {
    channel.validate();
    require_grid(rho_db);
    stopping.validate();
    if (blocks_per_trial < 1 || blocks_per_trial > 100000) throw ValidationError("blocks_per_trial must be in [1, 100000]");
}

BerCurve simulate_ber(const link::ResolvedSystem& sys, const BerRequest& req, const Execution& exec) {
    req.validate();
    exec.validate();
    if (sys.nt != req.channel.nt || sys.nr != req.channel.nr)
        throw ValidationError("simulate_ber: system antenna counts differ from the channel configuration");

    const std::size_t np = req.rho_db.size();
    const auto blocks = static_cast<std::size_t>(req.blocks_per_trial);
    const auto symbols = static_cast<std::size_t>(sys.spec.symbols_per_block(sys.nt));
    const auto t_len = static_cast<std::size_t>(sys.spec.block_length(sys.nt));
    const auto nr = static_cast<std::size_t>(sys.nr);
    const int eta = sys.constellation.bits_per_symbol();
    const std::uint64_t bits_per_trial = static_cast<std::uint64_t>(blocks * symbols) * static_cast<std::uint64_t>(eta);

    channel::ChannelConfig cfg = req.channel;
    cfg.master_seed = system_seed(req.channel.master_seed, sys.name(), req.independent_streams);

    std::vector<double> sigma(np);
    for (std::size_t p = 0; p < np; ++p) sigma[p] = std::sqrt(1.0 / rho_of(req.rho_db[p]));

    std::vector<BerPoint> pts(np);
    std::vector<RunningStats> err_stats(np);
    std::vector<char> active(np, 1);
    const std::size_t batch = batch_size(exec, kBerBatch);
    std::vector<std::uint32_t> buf;

    for (std::uint64_t start = 0; std::find(active.begin(), active.end(), 1) != active.end(); start += batch) {
        buf.assign(batch * np, 0);
        parallel_for(batch, exec.workers, [&](std::size_t i) {
            const std::uint64_t trial = start + i;
            const channel::ChannelRealization chan = channel::sample_channel(cfg, trial);
            const link::Link lk(sys, chan);
            channel::Rng payload = channel::substream(cfg.master_seed, trial, channel::Stream::payload);
            channel::Rng noise = channel::substream(cfg.master_seed, trial, channel::Stream::noise);

            std::vector<unsigned> labels(blocks * symbols);
            std::vector<std::size_t> index(blocks * symbols);
            for (std::size_t k = 0; k < labels.size(); ++k) {
                labels[k] = static_cast<unsigned>(payload() >> (64 - eta));
                index[k] = sys.constellation.index_of_label(labels[k]);
            }
            std::vector<ComplexMatrix> clean(blocks), unit_noise(blocks);
            for (std::size_t b = 0; b < blocks; ++b) {
                clean[b] = lk.transmit(std::span(index).subspan(b * symbols, symbols));
                unit_noise[b] = channel::gaussian_matrix(noise, nr, t_len);
            }

            for (std::size_t p = 0; p < np; ++p) {
                if (!active[p]) continue;
                const auto rx = lk.receiver(sigma[p] * sigma[p]);
                std::uint32_t errors = 0;
                for (std::size_t b = 0; b < blocks; ++b) {
                    ComplexMatrix y = unit_noise[b];
                    y *= sigma[p];
                    y += clean[b];
                    const auto decided = rx.decide(y);
                    for (std::size_t k = 0; k < symbols; ++k)
                        errors += static_cast<std::uint32_t>(
                            std::popcount(labels[b * symbols + k] ^ sys.constellation.label(decided[k])));
                }
                buf[i * np + p] = errors;
            }
        });
        for (std::size_t p = 0; p < np; ++p) {
            if (!active[p]) continue;
            for (std::size_t i = 0; i < batch; ++i) {
                pts[p].errors += buf[i * np + p];
                err_stats[p].add(static_cast<double>(buf[i * np + p]));
            }
            pts[p].trials += batch;
            pts[p].bits += batch * bits_per_trial;
            if (pts[p].errors >= req.stopping.min_errors) active[p] = 0;
            else if (pts[p].bits >= req.stopping.max_bits) {
                active[p] = 0;
                pts[p].capped = true;
            }
        }
    }

    BerCurve curve;
    curve.system = sys.name();
    curve.constellation = sys.constellation.name();
    curve.rate = sys.rate();
    curve.master_seed = req.channel.master_seed;
    for (std::size_t p = 0; p < np; ++p) {
        BerPoint& pt = pts[p];
        pt.rho_db = req.rho_db[p];
        pt.ber = static_cast<double>(pt.errors) / static_cast<double>(pt.bits);
        pt.stderr_ber = err_stats[p].stderr_of_mean() / static_cast<double>(bits_per_trial);
    }
    curve.points = std::move(pts);
    return curve;
}

AnalyticCurve ber_average_analytic(const link::ResolvedSystem& sys, const channel::ChannelConfig& cfg_in,
                                   std::span<const double> rho_db, std::size_t trials, const Execution& exec,
                                   bool independent_streams) {
    cfg_in.validate();
    require_grid(rho_db);
    exec.validate();
    if (trials < 1) throw ValidationError("analytic BER: at least one trial is required");
    if (sys.spec.receiver == link::ReceiverKind::ml)
        throw ValidationError("analytic BER: system '" + sys.name() + "' uses the ML receiver, which has no per-symbol SINR");
    if (sys.nt != cfg_in.nt || sys.nr != cfg_in.nr)
        throw ValidationError("analytic BER: system antenna counts differ from the channel configuration");

    channel::ChannelConfig cfg = cfg_in;
    cfg.master_seed = system_seed(cfg_in.master_seed, sys.name(), independent_streams);
    const std::size_t np = rho_db.size();
    std::vector<double> noise_var(np);
    for (std::size_t p = 0; p < np; ++p) noise_var[p] = 1.0 / rho_of(rho_db[p]);

    std::vector<RunningStats> stats(np);
    const std::size_t batch = batch_size(exec, kCapacityBatch);
    std::vector<double> buf;
    for (std::size_t start = 0; start < trials; start += batch) {
        const std::size_t count = std::min(batch, trials - start);
        buf.assign(count * np, 0.0);
        parallel_for(count, exec.workers, [&](std::size_t i) {
            const channel::ChannelRealization chan = channel::sample_channel(cfg, start + i);
            const link::Link lk(sys, chan);
            for (std::size_t p = 0; p < np; ++p) {
                const std::vector<double> g = lk.symbol_sinr(noise_var[p]);
                double acc = 0.0;
                for (const double v : g) acc += modem::ber_given_sinr(sys.constellation, v);
                buf[i * np + p] = acc / static_cast<double>(g.size());
            }
        });
        for (std::size_t i = 0; i < count; ++i)
            for (std::size_t p = 0; p < np; ++p) stats[p].add(buf[i * np + p]);
    }

    AnalyticCurve out;
    out.system = sys.name();
    out.constellation = sys.constellation.name();
    out.trials = trials;
    out.master_seed = cfg_in.master_seed;
    for (std::size_t p = 0; p < np; ++p) out.points.push_back({rho_db[p], stats[p].mean(), stats[p].stderr_of_mean()});
    return out;
}

} // namespace bnmimo::sim
