#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bnmimo/channel.hpp"
#include "bnmimo/detection.hpp"
#include "bnmimo/modem.hpp"
#include "bnmimo/schemes.hpp"
#include "bnmimo/stcode.hpp"

namespace bnmimo::link {

using linalg::ComplexMatrix;
using linalg::CVector;

enum class CodeKind { none, ldc, stbc };
enum class ReceiverKind { mmse, ml, mf };

std::string to_string(CodeKind c);
std::string to_string(ReceiverKind r);

/// Scheme, optional space-time code and receiver; the constellation is fixed
/// later by `resolve`, either from a data rate or explicitly.
struct SystemSpec {
    schemes::SchemeSpec scheme;
    CodeKind code = CodeKind::none;
    ReceiverKind receiver = ReceiverKind::mmse;

    /// Grammar: scheme[+ldc|+stbc][/mmse|/ml|/mf], e.g. "bn+ldc", "mdbn2+stbc",
    /// "bn/ml". The receiver defaults to mf for stbc and mmse otherwise.
    static SystemSpec parse(std::string_view token);
    std::string name() const;

    /// Throws ValidationError for combinations that cannot be simulated.
    void validate(int nt, int nr) const;

    int streams(int nt) const { return scheme.streams(nt); }
    /// Channel uses per code block (1 when uncoded).
    int block_length(int nt) const;
    /// Information symbols per code block.
    int symbols_per_block(int nt) const;
};

/// A system with its constellation chosen.
struct ResolvedSystem {
    SystemSpec spec;
    modem::Constellation constellation;
    int nt = 1;
    int nr = 1;
    std::optional<stcode::LinearDispersionCode> ldc;
    std::optional<stcode::OrthogonalDesign> od;

    std::string name() const { return spec.name(); }
    int bits_per_block() const { return spec.symbols_per_block(nt) * constellation.bits_per_symbol(); }
    double rate() const;
};

/// Picks the constellation carrying `rate` bits per channel use: PSK for up
/// to 3 bits per symbol, square QAM above. Throws if the rate does not divide
/// into whole bits per symbol or no square QAM fits.
ResolvedSystem resolve(const SystemSpec& spec, int nt, int nr, int rate);
/// Explicit constellation.
ResolvedSystem resolve(const SystemSpec& spec, int nt, int nr, const modem::Constellation& c);

/// Everything about a system that depends on one channel draw but not on the
/// noise level: effective channel, and the code's equivalent channel. Keeps a
/// reference to `sys`, which must outlive it.
class Link {
public:
    Link(const ResolvedSystem& sys, const channel::ChannelRealization& chan);

    const ComplexMatrix& effective_channel() const { return heff_; }
    /// LDC: (nr T) x L stacked channel. Otherwise equal to the effective channel.
    const ComplexMatrix& detection_channel() const { return g_; }

    /// Per-symbol post-detection SINR at this noise level (linear receivers only).
    std::vector<double> symbol_sinr(double noise_var) const;

    /// Receiver state for one noise level.
    class Receiver {
    public:
        /// Decides the symbol indices of one block from its received samples
        /// (nr x T, column per channel use).
        std::vector<std::size_t> decide(const ComplexMatrix& y_block) const;

    private:
        friend class Link;
        const Link* link_ = nullptr;
        double noise_var_ = 1.0;
        std::optional<detection::MmseDetector> mmse_;
    };

    Receiver receiver(double noise_var) const;

    /// nr x T noiseless received block for the given symbol indices.
    ComplexMatrix transmit(std::span<const std::size_t> symbols) const;

private:
    const ResolvedSystem* sys_;
    ComplexMatrix heff_;
    ComplexMatrix g_;
};

} // namespace bnmimo::link
