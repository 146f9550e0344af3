#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bnmimo/linalg.hpp"

namespace bnmimo::modem {

using linalg::cplx;
using linalg::CVector;

enum class ModKind { psk, qam };

/// Unit-average-energy, Gray-labelled constellation of 2^eta points.
class Constellation {
public:
    static Constellation psk(int eta);
    /// Square QAM; eta must be even and >= 2.
    static Constellation qam(int eta);
    /// PSK up to 8 points, square QAM above.
    static Constellation for_bits(int eta);
    /// "bpsk", "qpsk", "8psk", "16qam", "64qam", "256qam", "psk<eta>", "qam<eta>"
    static Constellation parse(const std::string& name);

    ModKind kind() const { return kind_; }
    int bits_per_symbol() const { return eta_; }
    std::size_t size() const { return points_.size(); }
    std::string name() const;

    std::span<const cplx> points() const { return points_; }
    const cplx& point(std::size_t index) const { return points_[index]; }
    /// Gray label (eta bits, MSB first) carried by point `index`.
    unsigned label(std::size_t index) const { return labels_[index]; }
    std::size_t index_of_label(unsigned label) const { return by_label_[label]; }

    /// Nearest point; exact ties resolve to the lower index.
    std::size_t slice(cplx z) const;

private:
    Constellation(ModKind kind, int eta);

    ModKind kind_;
    int eta_;
    int side_ = 0; // QAM points per axis
    double qam_step_ = 0.0;
    std::vector<cplx> points_;
    std::vector<unsigned> labels_;
    std::vector<std::size_t> by_label_;
};

/// Bits (one per byte, 0/1) to symbols. Bit count must be a multiple of eta.
CVector modulate(const Constellation& c, std::span<const std::uint8_t> bits);
/// Hard decisions back to bits.
std::vector<std::uint8_t> demodulate(const Constellation& c, std::span<const cplx> symbols);
std::vector<std::uint8_t> indices_to_bits(const Constellation& c, std::span<const std::size_t> indices);

/// Q(x) = erfc(x / sqrt 2) / 2.
double q_function(double x);

// Closed-form BER kernels as functions of the per-bit SNR gamma_b. eta = 1 uses
// the exact BPSK expression Q(sqrt(2 gamma_b)).
double ber_psk(double gamma_bit, int eta);
double ber_qam(double gamma_bit, int eta);

/// Kernel for constellation `c` evaluated at a per-symbol SINR (unit symbol
/// energy), i.e. at gamma_b = sinr / eta.
double ber_given_sinr(const Constellation& c, double sinr);

} // namespace bnmimo::modem
