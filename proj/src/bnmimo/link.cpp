#include "bnmimo/link.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "bnmimo/errors.hpp"

namespace bnmimo::link {

std::string to_string(CodeKind c) {
    switch (c) {
    case CodeKind::none: return "none";
    case CodeKind::ldc: return "ldc";
    case CodeKind::stbc: return "stbc";
    }
    return "?";
}

std::string to_string(ReceiverKind r) {
    switch (r) {
    case ReceiverKind::mmse: return "mmse";
    case ReceiverKind::ml: return "ml";
    case ReceiverKind::mf: return "mf";
    }
    return "?";
}

SystemSpec SystemSpec::parse(std::string_view token) {
    std::string t(token);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    SystemSpec s;

    bool receiver_given = false;
    if (const auto slash = t.find('/'); slash != std::string::npos) {
        const std::string rx = t.substr(slash + 1);
        t.resize(slash);
        if (rx == "mmse") s.receiver = ReceiverKind::mmse;
        else if (rx == "ml") s.receiver = ReceiverKind::ml;
        else if (rx == "mf") s.receiver = ReceiverKind::mf;
        else throw ValidationError("unknown receiver '" + rx + "' in system '" + std::string(token) + "' (mmse, ml, mf)");
        receiver_given = true;
    }
    if (const auto plus = t.find('+'); plus != std::string::npos) {
        const std::string code = t.substr(plus + 1);
        t.resize(plus);
        if (code == "ldc") s.code = CodeKind::ldc;
        else if (code == "stbc" || code == "od") s.code = CodeKind::stbc;
        else throw ValidationError("unknown code '" + code + "' in system '" + std::string(token) + "' (ldc, stbc)");
    }
    s.scheme = schemes::SchemeSpec::parse(t);
    if (!receiver_given && s.code == CodeKind::stbc) s.receiver = ReceiverKind::mf;
    return s;
}

std::string SystemSpec::name() const {
    std::string n = scheme.name();
    if (code != CodeKind::none) n += "+" + to_string(code);
    const ReceiverKind natural = code == CodeKind::stbc ? ReceiverKind::mf : ReceiverKind::mmse;
    if (receiver != natural) n += "/" + to_string(receiver);
    return n;
}

void SystemSpec::validate(int nt, int nr) const {
    channel::ChannelConfig{nt, nr, 1}.validate();
    if (scheme.kind == schemes::SchemeKind::water_filling)
        throw ValidationError("system '" + name() + "': water-filling has no fixed stream count and cannot be used for BER");
    scheme.validate(nt);
    if (code == CodeKind::stbc) {
        if (receiver != ReceiverKind::mf)
            throw ValidationError("system '" + name() + "': orthogonal designs are detected with the matched filter (mf)");
        if (streams(nt) > 4)
            throw ValidationError("system '" + name() + "': orthogonal designs are available for 1 to 4 streams");
    } else if (receiver == ReceiverKind::mf) {
        throw ValidationError("system '" + name() + "': the matched-filter receiver requires +stbc");
    }
}

int SystemSpec::block_length(int nt) const {
    switch (code) {
    case CodeKind::none: return 1;
    case CodeKind::ldc: return streams(nt);
    case CodeKind::stbc: return stcode::OrthogonalDesign::for_streams(streams(nt)).block_length();
    }
    return 1;
}

int SystemSpec::symbols_per_block(int nt) const {
    const int s = streams(nt);
    switch (code) {
    case CodeKind::none: return s;
    case CodeKind::ldc: return s * s;
    case CodeKind::stbc: return static_cast<int>(stcode::OrthogonalDesign::for_streams(s).symbols());
    }
    return s;
}

double ResolvedSystem::rate() const {
    return static_cast<double>(bits_per_block()) / spec.block_length(nt);
}

ResolvedSystem resolve(const SystemSpec& spec, int nt, int nr, const modem::Constellation& c) {
    spec.validate(nt, nr);
    ResolvedSystem r{spec, c, nt, nr, std::nullopt, std::nullopt};
    const int s = spec.streams(nt);
    if (spec.code == CodeKind::ldc) r.ldc = stcode::LinearDispersionCode::generate(s, s);
    if (spec.code == CodeKind::stbc) r.od = stcode::OrthogonalDesign::for_streams(s);
    if (spec.receiver == ReceiverKind::ml) {
        const double space = std::pow(static_cast<double>(c.size()), spec.symbols_per_block(nt));
        if (space > static_cast<double>(detection::kMlSearchLimit))
            throw ValidationError("system '" + spec.name() + "': ML search over " + std::to_string(c.size()) + "^" +
                                  std::to_string(spec.symbols_per_block(nt)) + " candidates exceeds 2^20");
    }
    return r;
}

ResolvedSystem resolve(const SystemSpec& spec, int nt, int nr, int rate) {
    spec.validate(nt, nr);
    if (rate < 1) throw ValidationError("data rate must be a positive number of bits per channel use");
    const int t = spec.block_length(nt);
    const int l = spec.symbols_per_block(nt);
    if ((rate * t) % l != 0)
        throw ValidationError("system '" + spec.name() + "': rate " + std::to_string(rate) + " does not give whole bits per symbol (" +
                              std::to_string(l) + " symbols per " + std::to_string(t) + " channel uses)");
    const int eta = rate * t / l;
    if (eta > 10) throw ValidationError("system '" + spec.name() + "': rate needs more than 10 bits per symbol");
    return resolve(spec, nt, nr, modem::Constellation::for_bits(eta));
}

// ---------------------------------------------------------------------------

Link::Link(const ResolvedSystem& sys, const channel::ChannelRealization& chan) : sys_(&sys) {
    if (chan.h.cols() != static_cast<std::size_t>(sys.nt) || chan.h.rows() != static_cast<std::size_t>(sys.nr))
        throw ValidationError("link: channel dimensions differ from the system's antenna counts");
    // The precoders used for BER do not depend on the noise level.
    heff_ = chan.h * schemes::precoder(sys.spec.scheme, chan.svd, 1.0);
    g_ = sys.ldc ? stcode::equivalent_channel(heff_, *sys.ldc) : heff_;
}

std::vector<double> Link::symbol_sinr(double noise_var) const {
    switch (sys_->spec.receiver) {
    case ReceiverKind::mmse: return detection::MmseDetector(g_, noise_var).sinr();
    case ReceiverKind::mf: {
        if (!(noise_var > 0.0)) throw ValidationError("matched filter: noise variance must be positive");
        const double hf = heff_.frobenius_norm();
        return std::vector<double>(sys_->od->symbols(), sys_->od->gram_scale() * hf * hf / noise_var);
    }
    case ReceiverKind::ml: break;
    }
    throw ValidationError("system '" + sys_->name() + "': no per-symbol SINR for the ML receiver");
}

Link::Receiver Link::receiver(double noise_var) const {
    Receiver r;
    r.link_ = this;
    r.noise_var_ = noise_var;
    if (sys_->spec.receiver == ReceiverKind::mmse) r.mmse_.emplace(g_, noise_var);
    return r;
}

std::vector<std::size_t> Link::Receiver::decide(const ComplexMatrix& y_block) const {
    const ResolvedSystem& sys = *link_->sys_;
    const modem::Constellation& c = sys.constellation;
    switch (sys.spec.receiver) {
    case ReceiverKind::mmse: {
        const CVector y = stcode::stack_columns(y_block);
        const CVector soft = mmse_->equalize(y);
        std::vector<std::size_t> out(soft.size());
        for (std::size_t i = 0; i < soft.size(); ++i) out[i] = c.slice(soft[i]);
        return out;
    }
    case ReceiverKind::ml: return detection::ml_detect(link_->g_, stcode::stack_columns(y_block), c);
    case ReceiverKind::mf: return detection::matched_filter_od(link_->heff_, noise_var_, *sys.od, y_block, &c).hard;
    }
    return {};
}

ComplexMatrix Link::transmit(std::span<const std::size_t> symbols) const {
    const ResolvedSystem& sys = *sys_;
    CVector x(symbols.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = sys.constellation.point(symbols[i]);
    switch (sys.spec.code) {
    case CodeKind::none: {
        if (x.size() != heff_.cols()) throw ValidationError("transmit: one symbol per stream expected");
        return ComplexMatrix::column_vector(linalg::apply(heff_, x));
    }
    case CodeKind::ldc: return heff_ * sys.ldc->encode(x);
    case CodeKind::stbc: return heff_ * sys.od->encode(x);
    }
    return {};
}

} // namespace bnmimo::link
