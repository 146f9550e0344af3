#include "bnmimo/modem.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "bnmimo/errors.hpp"

namespace bnmimo::modem {

namespace {

unsigned gray(unsigned x) { return x ^ (x >> 1); }

void require_gamma(double g) {
    if (!(g >= 0.0) || std::isnan(g)) throw ValidationError("ber kernel: SNR must be >= 0");
}

} // namespace

Constellation::Constellation(ModKind kind, int eta) : kind_(kind), eta_(eta) {
    if (eta < 1 || eta > 10) throw ValidationError("constellation: bits per symbol must be in [1, 10]");
    const std::size_t m = std::size_t{1} << eta;
    points_.resize(m);
    labels_.resize(m);
    by_label_.resize(m);

    if (kind == ModKind::psk) {
        for (std::size_t i = 0; i < m; ++i) {
            points_[i] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(m));
            labels_[i] = gray(static_cast<unsigned>(i));
        }
    } else {
        if (eta % 2 != 0 || eta < 2) throw ValidationError("constellation: square QAM needs an even eta >= 2");
        side_ = 1 << (eta / 2);
        const int half = eta / 2;
        double energy = 0.0;
        for (int pi = 0; pi < side_; ++pi)
            for (int pq = 0; pq < side_; ++pq) {
                const double re = 2.0 * pi - (side_ - 1);
                const double im = 2.0 * pq - (side_ - 1);
                energy += re * re + im * im;
            }
        const double scale = 1.0 / std::sqrt(energy / static_cast<double>(m));
        qam_step_ = 2.0 * scale;
        for (int pi = 0; pi < side_; ++pi)
            for (int pq = 0; pq < side_; ++pq) {
                const std::size_t idx = static_cast<std::size_t>(pi * side_ + pq);
                points_[idx] = {scale * (2.0 * pi - (side_ - 1)), scale * (2.0 * pq - (side_ - 1))};
                labels_[idx] = (gray(static_cast<unsigned>(pi)) << half) | gray(static_cast<unsigned>(pq));
            }
    }
    for (std::size_t i = 0; i < m; ++i) by_label_[labels_[i]] = i;
}

Constellation Constellation::psk(int eta) { return Constellation(ModKind::psk, eta); }
Constellation Constellation::qam(int eta) { return Constellation(ModKind::qam, eta); }

Constellation Constellation::for_bits(int eta) {
    if (eta <= 3) return psk(eta);
    if (eta % 2 != 0) throw ValidationError("constellation: no square QAM with " + std::to_string(eta) + " bits per symbol");
    return qam(eta);
}

Constellation Constellation::parse(const std::string& raw) {
    std::string s(raw);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "bpsk") return psk(1);
    if (s == "qpsk" || s == "4psk") return psk(2);
    const auto number_then = [&](const std::string& suffix) -> int {
        if (s.size() <= suffix.size() || s.compare(s.size() - suffix.size(), suffix.size(), suffix) != 0) return -1;
        const std::string num = s.substr(0, s.size() - suffix.size());
        if (num.empty() || !std::all_of(num.begin(), num.end(), ::isdigit)) return -1;
        const unsigned long m = std::stoul(num);
        int eta = 0;
        while ((1UL << eta) < m) ++eta;
        return (1UL << eta) == m ? eta : -1;
    };
    if (const int eta = number_then("psk"); eta > 0) return psk(eta);
    if (const int eta = number_then("qam"); eta > 0) return qam(eta);
    throw ValidationError("unknown constellation '" + raw + "'");
}

std::string Constellation::name() const {
    if (kind_ == ModKind::psk) {
        if (eta_ == 1) return "bpsk";
        if (eta_ == 2) return "qpsk";
        return std::to_string(size()) + "psk";
    }
    return std::to_string(size()) + "qam";
}

std::size_t Constellation::slice(cplx z) const {
    if (kind_ == ModKind::qam) {
        // Per-axis rounding is exact for a square grid except on decision
        // boundaries, where the brute-force path applies the tie rule.
        const auto axis = [&](double v, bool& boundary) {
            const double u = v / qam_step_ + 0.5 * (side_ - 1);
            const double r = std::floor(u + 0.5);
            boundary = boundary || (u + 0.5 == r && r > 0 && r < side_);
            return static_cast<int>(std::clamp(r, 0.0, static_cast<double>(side_ - 1)));
        };
        bool boundary = false;
        const int pi = axis(z.real(), boundary);
        const int pq = axis(z.imag(), boundary);
        if (!boundary) return static_cast<std::size_t>(pi * side_ + pq);
    }
    std::size_t best = 0;
    double best_d = std::norm(z - points_[0]);
    for (std::size_t i = 1; i < points_.size(); ++i) {
        const double d = std::norm(z - points_[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

CVector modulate(const Constellation& c, std::span<const std::uint8_t> bits) {
    const auto eta = static_cast<std::size_t>(c.bits_per_symbol());
    if (bits.size() % eta != 0) throw ValidationError("modulate: bit count is not a multiple of bits per symbol");
    CVector out(bits.size() / eta);
    for (std::size_t s = 0; s < out.size(); ++s) {
        unsigned label = 0;
        for (std::size_t b = 0; b < eta; ++b) label = (label << 1) | (bits[s * eta + b] & 1U);
        out[s] = c.point(c.index_of_label(label));
    }
    return out;
}

std::vector<std::uint8_t> indices_to_bits(const Constellation& c, std::span<const std::size_t> indices) {
    const auto eta = static_cast<std::size_t>(c.bits_per_symbol());
    std::vector<std::uint8_t> bits(indices.size() * eta);
    for (std::size_t s = 0; s < indices.size(); ++s) {
        if (indices[s] >= c.size()) throw ValidationError("demodulate: symbol index out of range");
        const unsigned label = c.label(indices[s]);
        for (std::size_t b = 0; b < eta; ++b) bits[s * eta + b] = static_cast<std::uint8_t>((label >> (eta - 1 - b)) & 1U);
    }
    return bits;
}

std::vector<std::uint8_t> demodulate(const Constellation& c, std::span<const cplx> symbols) {
    std::vector<std::size_t> idx(symbols.size());
    for (std::size_t s = 0; s < symbols.size(); ++s) idx[s] = c.slice(symbols[s]);
    return indices_to_bits(c, idx);
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double ber_psk(double gamma_bit, int eta) {
    require_gamma(gamma_bit);
    if (eta < 1) throw ValidationError("ber_psk: eta must be >= 1");
    if (eta == 1) return q_function(std::sqrt(2.0 * gamma_bit));
    const double m = std::ldexp(1.0, eta);
    return 2.0 / eta * q_function(std::sqrt(2.0 * eta * gamma_bit) * std::sin(std::numbers::pi / m));
}

double ber_qam(double gamma_bit, int eta) {
    require_gamma(gamma_bit);
    if (eta < 2 || eta % 2 != 0) throw ValidationError("ber_qam: eta must be even and >= 2");
    const double m = std::ldexp(1.0, eta);
    return 4.0 / eta * q_function(std::sqrt(3.0 * eta * gamma_bit / (m - 1.0)));
}

double ber_given_sinr(const Constellation& c, double sinr) {
    const int eta = c.bits_per_symbol();
    const double gb = sinr / eta;
    return c.kind() == ModKind::psk ? ber_psk(gb, eta) : ber_qam(gb, eta);
}

} // namespace bnmimo::modem
