#include "bnmimo/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "bnmimo/channel.hpp"
#include "bnmimo/detection.hpp"
#include "bnmimo/errors.hpp"
#include "bnmimo/schemes.hpp"

namespace bnmimo::selftest {

namespace {

using linalg::ComplexMatrix;
using linalg::cplx;
using linalg::CVector;

// Gauss-Jordan inverse with partial pivoting; deliberately independent of the
// Cholesky path the detector uses.
ComplexMatrix gauss_jordan_inverse(ComplexMatrix a) {
    const std::size_t n = a.rows();
    ComplexMatrix inv = ComplexMatrix::identity(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
        if (std::abs(a(piv, c)) == 0.0) throw NumericalError("self-test: singular matrix in oracle inverse");
        for (std::size_t j = 0; j < n; ++j) {
            std::swap(a(c, j), a(piv, j));
            std::swap(inv(c, j), inv(piv, j));
        }
        const cplx d = 1.0 / a(c, c);
        for (std::size_t j = 0; j < n; ++j) {
            a(c, j) *= d;
            inv(c, j) *= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || a(r, c) == 0.0) continue;
            const cplx f = a(r, c);
            for (std::size_t j = 0; j < n; ++j) {
                a(r, j) -= f * a(c, j);
                inv(r, j) -= f * inv(c, j);
            }
        }
    }
    return inv;
}

struct Instance {
    channel::Rng rng;
    int nt;
    int nr;
    ComplexMatrix h;
    double rho;
};

// Antenna counts 2..6 (nr >= nt), SNR uniform over -10..30 dB.
Instance draw(std::uint64_t seed, std::size_t i) {
    channel::Rng rng = channel::substream(seed, i, channel::Stream::oracle);
    const int nt = 2 + static_cast<int>(rng() % 5);
    const int nr = nt + static_cast<int>(rng() % (7 - nt));
    ComplexMatrix h = channel::gaussian_matrix(rng, nr, nt);
    const double db = -10.0 + 40.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return {std::move(rng), nt, nr, std::move(h), std::pow(10.0, db / 10.0)};
}

PropertyResult check(const std::string& name, double tol, std::size_t n, const std::function<double(std::size_t)>& residual) {
    PropertyResult p{name, true, 0.0, tol, n};
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        try {
            r = residual(i);
        } catch (const std::exception&) {
            r = INFINITY;
        }
        if (!(r <= p.worst)) p.worst = std::isnan(r) ? INFINITY : std::max(p.worst, r);
    }
    p.passed = p.worst <= tol;
    return p;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string property_lines(const std::vector<PropertyResult>& ps) {
    std::string out;
    char buf[256];
    for (const auto& p : ps) {
        std::snprintf(buf, sizeof buf, "%s %-26s worst=%.3e tol=%.0e n=%zu\n", p.passed ? "PASS" : "FAIL", p.name.c_str(), p.worst,
                      p.tolerance, p.instances);
        out += buf;
    }
    return out;
}

} // namespace

bool Report::passed() const {
    return std::all_of(properties.begin(), properties.end(), [](const PropertyResult& p) { return p.passed; });
}

std::string Report::text() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "report-hash %016llx\n", static_cast<unsigned long long>(hash));
    return property_lines(properties) + buf;
}

Report run(const Options& opts) {
    if (opts.instances < 1) throw ValidationError("self-test: instances must be at least 1");
    const auto fault = opts.inject_fault ? linalg::detail::ComplementFault::flip_entry_sign : linalg::detail::ComplementFault::none;
    const std::size_t n = opts.instances;
    const std::uint64_t seed = opts.seed;
    Report rep;

    rep.properties.push_back(check("svd-reconstruction", 1e-10, n, [&](std::size_t i) {
        const Instance in = draw(seed, i);
        const auto s = linalg::svd(in.h);
        const ComplexMatrix sig = ComplexMatrix::diagonal(s.sigma, in.h.rows(), in.h.cols());
        const double scale = std::max(1.0, s.sigma.front());
        return std::max({linalg::max_abs_diff(s.u * sig * s.v.adjoint(), in.h) / scale, linalg::gram_deviation(s.u),
                         linalg::gram_deviation(s.v)});
    }));

    // Complement of the weakest k right singular vectors.
    const auto complement = [&](const Instance& in, int k) {
        const auto s = linalg::svd(in.h);
        const ComplexMatrix vk = s.v.columns(in.nt - k, k);
        return std::pair{s, linalg::detail::orthonormal_complement(vk, fault)};
    };
    rep.properties.push_back(check("complement-orthogonality", 1e-10, n, [&](std::size_t i) {
        const Instance in = draw(seed, i);
        const int k = 1 + static_cast<int>(i % static_cast<std::size_t>(std::max(1, in.nt / 2)));
        const auto [s, phi] = complement(in, k);
        const ComplexMatrix cross = phi.adjoint() * s.v.columns(in.nt - k, k);
        double worst = 0.0;
        for (const cplx& z : cross.entries()) worst = std::max(worst, std::abs(z));
        return std::max(worst, linalg::gram_deviation(phi));
    }));
    rep.properties.push_back(check("rotation-unitarity", 1e-10, n, [&](std::size_t i) {
        const Instance in = draw(seed, i);
        const int k = 1 + static_cast<int>(i % static_cast<std::size_t>(std::max(1, in.nt / 2)));
        const auto [s, phi] = complement(in, k);
        const ComplexMatrix b = s.v.columns(0, in.nt - k).adjoint() * phi;
        return std::max(linalg::gram_deviation(b), linalg::gram_deviation(b.adjoint()));
    }));

    rep.properties.push_back(check("waterfill-kkt", 1e-9, n, [&](std::size_t i) {
        const Instance in = draw(seed, i);
        const auto s = linalg::svd(in.h);
        const double nv = 1.0 / in.rho;
        return schemes::waterfill_kkt_residual(s.sigma, schemes::waterfill(s.sigma, 1.0, nv), 1.0, nv);
    }));

    rep.properties.push_back(check("mmse-sinr-oracle", 1e-9, n, [&](std::size_t i) {
        const Instance in = draw(seed, i);
        const auto s = linalg::svd(in.h);
        const auto spec = schemes::SchemeSpec{schemes::SchemeKind::beam_nulling, 1, 1.0};
        const double nv = 1.0 / in.rho;
        const ComplexMatrix heff = in.h * schemes::precoder(spec, s, nv);
        const detection::MmseDetector det(heff, nv);
        double worst = 0.0;
        for (std::size_t j = 0; j < heff.cols(); ++j) {
            // R_I = sum of the other streams' outer products plus noise.
            ComplexMatrix r = nv * ComplexMatrix::identity(heff.rows());
            for (std::size_t l = 0; l < heff.cols(); ++l) {
                if (l == j) continue;
                const ComplexMatrix c = heff.columns(l, 1);
                r += c * c.adjoint();
            }
            const CVector hj = heff.column(j);
            const double oracle = linalg::inner(hj, linalg::apply(gauss_jordan_inverse(r), hj)).real();
            worst = std::max(worst, std::abs(det.sinr()[j] - oracle) / std::max(1.0, oracle));
        }
        return worst;
    }));

    rep.properties.push_back(check("two-antenna-bf-bn", 1e-9, n, [&](std::size_t i) {
        channel::Rng rng = channel::substream(seed, i, channel::Stream::oracle);
        const int nr = 2 + static_cast<int>(rng() % 4);
        const auto s = linalg::svd(channel::gaussian_matrix(rng, nr, 2));
        const double rho = std::pow(10.0, (-10.0 + 40.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng)) / 10.0);
        return std::abs(schemes::capacity_bf(s.sigma, rho) - schemes::capacity_bn(s.sigma, rho, 2));
    }));

    rep.properties.push_back(check("waterfill-dominance", 1e-9, n, [&](std::size_t i) {
        const Instance in = draw(seed, i);
        const auto s = linalg::svd(in.h);
        const double wf = schemes::capacity_nats(schemes::SchemeSpec::parse("wf"), s.sigma, in.rho, in.nt);
        double worst = 0.0;
        std::vector<std::string> names{"eq", "bf", "bn"};
        for (int k = 1; k <= in.nt / 2; ++k) {
            names.push_back("mdbf" + std::to_string(k));
            names.push_back("mdbn" + std::to_string(k));
        }
        for (const auto& nm : names)
            worst = std::max(worst, schemes::capacity_nats(schemes::SchemeSpec::parse(nm), s.sigma, in.rho, in.nt) - wf);
        return worst / std::log(2.0);
    }));

    rep.hash = fnv1a(property_lines(rep.properties));
    return rep;
}

} // namespace bnmimo::selftest
