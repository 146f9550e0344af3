#include "bnmimo/stcode.hpp"

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "bnmimo/errors.hpp"

namespace bnmimo::stcode {

using linalg::ComplexMatrix;

// ---------------------------------------------------------------------------
// Linear dispersion code

LinearDispersionCode LinearDispersionCode::generate(int streams, int block_length) {
    if (streams < 1 || block_length < streams)
        throw ValidationError("generate_ldc: requires streams >= 1 and T >= streams");
    if (streams * block_length > 256) throw ValidationError("generate_ldc: block too large");

    const double scale = 1.0 / std::sqrt(static_cast<double>(streams));
    const cplx w = std::polar(1.0, 2.0 * std::numbers::pi / streams);
    std::vector<ComplexMatrix> ms;
    ms.reserve(static_cast<std::size_t>(streams * block_length));
    for (int a = 0; a < streams; ++a) {
        for (int b = 0; b < block_length; ++b) {
            ComplexMatrix m(static_cast<std::size_t>(streams), static_cast<std::size_t>(block_length));
            for (int r = 0; r < streams; ++r) m(r, (r + b) % block_length) = scale * std::pow(w, a * r);
            ms.push_back(std::move(m));
        }
    }
    return LinearDispersionCode(streams, block_length, std::move(ms));
}

LinearDispersionCode::LinearDispersionCode(int streams, int block_length, std::vector<ComplexMatrix> dispersion)
    : streams_(streams), block_length_(block_length), dispersion_(std::move(dispersion)) {
    if (streams < 1 || block_length < 1 || dispersion_.empty()) throw ValidationError("ldc: invalid dimensions");
    for (const auto& m : dispersion_)
        if (m.rows() != static_cast<std::size_t>(streams) || m.cols() != static_cast<std::size_t>(block_length))
            throw ValidationError("ldc: dispersion matrix shape differs from streams x T");
}

ComplexMatrix LinearDispersionCode::encode(std::span<const cplx> x) const {
    if (x.size() != dispersion_.size()) throw ValidationError("ldc_encode: block must hold exactly L symbols");
    ComplexMatrix s(static_cast<std::size_t>(streams_), static_cast<std::size_t>(block_length_));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto mi = dispersion_[i].entries();
        auto se = s.entries();
        for (std::size_t k = 0; k < se.size(); ++k) se[k] += mi[k] * x[i];
    }
    return s;
}

nlohmann::json to_json(const LinearDispersionCode& code) {
    nlohmann::json j;
    j["streams"] = code.streams();
    j["block_length"] = code.block_length();
    j["symbols"] = code.symbols();
    auto& arr = j["dispersion"] = nlohmann::json::array();
    for (const auto& m : code.dispersion()) {
        nlohmann::json entries = nlohmann::json::array();
        for (const cplx z : m.entries()) entries.push_back({z.real(), z.imag()});
        arr.push_back({{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(entries)}});
    }
    return j;
}

CVector stack_columns(const ComplexMatrix& block) {
    CVector v(block.rows() * block.cols());
    for (std::size_t t = 0; t < block.cols(); ++t)
        for (std::size_t r = 0; r < block.rows(); ++r) v[t * block.rows() + r] = block(r, t);
    return v;
}

ComplexMatrix equivalent_channel(const ComplexMatrix& heff, const LinearDispersionCode& code) {
    if (heff.cols() != static_cast<std::size_t>(code.streams()))
        throw ValidationError("equivalent_channel: code streams differ from effective-channel streams");
    const std::size_t nr = heff.rows();
    const std::size_t t = static_cast<std::size_t>(code.block_length());
    ComplexMatrix g(nr * t, code.symbols());
    for (std::size_t i = 0; i < code.symbols(); ++i) {
        const CVector col = stack_columns(heff * code.dispersion()[i]);
        g.set_column(i, col);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Orthogonal designs

namespace {

// One entry of a design template: +-x_idx or +-conj(x_idx).
struct Cell {
    int symbol = -1; // -1 = zero
    double sign = 1.0;
    bool conjugate = false;
};

using Template = std::vector<std::vector<Cell>>; // [stream][time]

Template alamouti() {
    // [[x1, -x2*], [x2, x1*]]
    return {{{0, 1, false}, {1, -1, true}}, {{1, 1, false}, {0, 1, true}}};
}

Template rate34(int streams) {
    // Time x antenna form (rows = channel uses):
    //   [ x1    x2    x3    0  ]
    //   [-x2*   x1*   0     x3 ]
    //   [-x3*   0     x1*  -x2 ]
    //   [ 0    -x3*   x2*   x1 ]
    // stored transposed (antenna x time); three antennas drop the last one.
    const Cell z{};
    const Cell time_major[4][4] = {
        {{0, 1, false}, {1, 1, false}, {2, 1, false}, z},
        {{1, -1, true}, {0, 1, true}, z, {2, 1, false}},
        {{2, -1, true}, z, {0, 1, true}, {1, -1, false}},
        {z, {2, -1, true}, {1, 1, true}, {0, 1, false}},
    };
    Template t(static_cast<std::size_t>(streams), std::vector<Cell>(4));
    for (int ant = 0; ant < streams; ++ant)
        for (int time = 0; time < 4; ++time) t[ant][time] = time_major[time][ant];
    return t;
}

} // namespace

OrthogonalDesign OrthogonalDesign::make(OdVariant variant) {
    Template tpl;
    int symbols = 0;
    switch (variant) {
    case OdVariant::single: tpl = {{{0, 1, false}}}; symbols = 1; break;
    case OdVariant::alamouti2: tpl = alamouti(); symbols = 2; break;
    case OdVariant::rate34_3ant: tpl = rate34(3); symbols = 3; break;
    case OdVariant::rate34_4ant: tpl = rate34(4); symbols = 3; break;
    }
    const std::size_t streams = tpl.size();
    const std::size_t t = tpl.front().size();

    OrthogonalDesign od;
    od.variant_ = variant;
    od.streams_ = static_cast<int>(streams);
    od.block_length_ = static_cast<int>(t);
    od.re_.assign(static_cast<std::size_t>(symbols), ComplexMatrix(streams, t));
    od.im_.assign(static_cast<std::size_t>(symbols), ComplexMatrix(streams, t));
    for (std::size_t r = 0; r < streams; ++r)
        for (std::size_t c = 0; c < t; ++c) {
            const Cell& cell = tpl[r][c];
            if (cell.symbol < 0) continue;
            od.re_[cell.symbol](r, c) = cell.sign;
            od.im_[cell.symbol](r, c) = cplx{0.0, cell.conjugate ? -cell.sign : cell.sign};
        }

    // E||S||_F^2 = sum_i (||A_i||^2 + ||B_i||^2) / 2 must equal streams * T.
    double energy = 0.0;
    for (std::size_t i = 0; i < od.re_.size(); ++i)
        energy += (std::pow(od.re_[i].frobenius_norm(), 2) + std::pow(od.im_[i].frobenius_norm(), 2)) / 2.0;
    const double g = std::sqrt(static_cast<double>(streams * t) / energy);
    for (auto& m : od.re_) m *= g;
    for (auto& m : od.im_) m *= g;
    od.defect_ = od.compute_defect();
    return od;
}

OrthogonalDesign OrthogonalDesign::for_streams(int streams) {
    switch (streams) {
    case 1: return make(OdVariant::single);
    case 2: return make(OdVariant::alamouti2);
    case 3: return make(OdVariant::rate34_3ant);
    case 4: return make(OdVariant::rate34_4ant);
    default: break;
    }
    throw ValidationError("orthogonal design: only 1 to 4 streams are supported (got " + std::to_string(streams) + ")");
}

OrthogonalDesign OrthogonalDesign::from_real_dispersion(int streams, int block_length,
                                                       std::vector<ComplexMatrix> re_part,
                                                       std::vector<ComplexMatrix> im_part) {
    if (re_part.empty() || re_part.size() != im_part.size())
        throw ValidationError("orthogonal design: need one real and one imaginary matrix per symbol");
    for (const auto* set : {&re_part, &im_part})
        for (const auto& m : *set)
            if (m.rows() != static_cast<std::size_t>(streams) || m.cols() != static_cast<std::size_t>(block_length))
                throw ValidationError("orthogonal design: dispersion shape differs from streams x T");
    OrthogonalDesign od;
    od.custom_ = true;
    od.streams_ = streams;
    od.block_length_ = block_length;
    od.re_ = std::move(re_part);
    od.im_ = std::move(im_part);
    od.defect_ = od.compute_defect();
    return od;
}

std::string OrthogonalDesign::name() const {
    if (custom_) return "custom";
    switch (variant_) {
    case OdVariant::single: return "single";
    case OdVariant::alamouti2: return "alamouti";
    case OdVariant::rate34_3ant: return "rate34-3";
    case OdVariant::rate34_4ant: return "rate34-4";
    }
    return "?";
}

ComplexMatrix OrthogonalDesign::encode(std::span<const cplx> x) const {
    if (x.size() != symbols())
        throw ValidationError("encode_od: expected " + std::to_string(symbols()) + " symbols per block");
    ComplexMatrix s(static_cast<std::size_t>(streams_), static_cast<std::size_t>(block_length_));
    auto se = s.entries();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto a = re_[i].entries();
        const auto b = im_[i].entries();
        for (std::size_t k = 0; k < se.size(); ++k) se[k] += a[k] * x[i].real() + b[k] * x[i].imag();
    }
    return s;
}

double OrthogonalDesign::gram_scale() const {
    const double n2 = re_.front().frobenius_norm();
    return n2 * n2 / streams_;
}

double OrthogonalDesign::compute_defect() const {
    std::vector<const ComplexMatrix*> c;
    for (std::size_t i = 0; i < re_.size(); ++i) {
        c.push_back(&re_[i]);
        c.push_back(&im_[i]);
    }
    const double scale = gram_scale();
    if (!(scale > 0.0)) return INFINITY;
    double defect = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k)
        for (std::size_t l = k; l < c.size(); ++l) {
            ComplexMatrix sym = (*c[k]) * c[l]->adjoint() + (*c[l]) * c[k]->adjoint();
            if (k == l) sym -= 2.0 * scale * ComplexMatrix::identity(static_cast<std::size_t>(streams_));
            for (const cplx z : sym.entries()) defect = std::max(defect, std::abs(z) / scale);
        }
    return defect;
}

} // namespace bnmimo::stcode
