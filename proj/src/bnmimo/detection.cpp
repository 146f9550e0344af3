#include "bnmimo/detection.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bnmimo/errors.hpp"

namespace bnmimo::detection {

namespace {

void require_noise(double noise_var) {
    if (!(noise_var > 0.0) || !std::isfinite(noise_var))
        throw ValidationError("mmse: noise variance must be positive and finite");
}

void require_channel(const ComplexMatrix& h) {
    if (h.empty()) throw ValidationError("detector: empty effective channel");
    if (!h.all_finite()) throw ValidationError("detector: effective channel has non-finite entries");
}

std::vector<std::size_t> slice_all(const modem::Constellation& c, std::span<const cplx> soft) {
    std::vector<std::size_t> out(soft.size());
    for (std::size_t i = 0; i < soft.size(); ++i) out[i] = c.slice(soft[i]);
    return out;
}

} // namespace

ComplexMatrix interference_covariance(const ComplexMatrix& h, double noise_var, std::size_t i) {
    const std::size_t nr = h.rows();
    ComplexMatrix r = ComplexMatrix::identity(nr);
    r *= noise_var;
    for (std::size_t j = 0; j < h.cols(); ++j) {
        if (j == i) continue;
        for (std::size_t a = 0; a < nr; ++a) {
            const cplx ha = h(a, j);
            for (std::size_t b = 0; b < nr; ++b) r(a, b) += ha * std::conj(h(b, j));
        }
    }
    return r;
}

MmseDetector::MmseDetector(const ComplexMatrix& h, double noise_var) {
    require_channel(h);
    require_noise(noise_var);
    const std::size_t s = h.cols();
    weights_ = ComplexMatrix(h.rows(), s);
    sinr_.resize(s);
    for (std::size_t i = 0; i < s; ++i) {
        const CVector hi = h.column(i);
        const linalg::CholeskyFactor chol(interference_covariance(h, noise_var, i));
        CVector w = chol.solve(hi);
        const double gamma = std::real(linalg::inner(hi, w));
        if (!(gamma > 0.0) || !std::isfinite(gamma))
            throw NumericalError("mmse: stream " + std::to_string(i) + " has non-positive SINR");
        for (auto& v : w) v /= gamma;
        weights_.set_column(i, w);
        sinr_[i] = gamma;
    }
    weights_adj_ = weights_.adjoint();
}

CVector MmseDetector::equalize(std::span<const cplx> y) const {
    if (y.size() != weights_.rows()) throw ValidationError("mmse: received vector length differs from receive dimension");
    return linalg::apply(weights_adj_, y);
}

DetectionResult MmseDetector::detect(std::span<const cplx> y, const modem::Constellation* c) const {
    DetectionResult r;
    r.soft = equalize(y);
    r.sinr = sinr_;
    if (c != nullptr) r.hard = slice_all(*c, r.soft);
    return r;
}

DetectionResult mmse_detect(const ComplexMatrix& h, double noise_var, std::span<const cplx> y,
                            const modem::Constellation* c) {
    return MmseDetector(h, noise_var).detect(y, c);
}

CVector mmse_weight_full_covariance(const ComplexMatrix& h, double noise_var, std::size_t i) {
    require_channel(h);
    require_noise(noise_var);
    if (i >= h.cols()) throw ValidationError("mmse: stream index out of range");
    ComplexMatrix r = interference_covariance(h, noise_var, i);
    const CVector hi = h.column(i);
    for (std::size_t a = 0; a < r.rows(); ++a)
        for (std::size_t b = 0; b < r.cols(); ++b) r(a, b) += hi[a] * std::conj(hi[b]);
    CVector w = linalg::hermitian_solve(r, hi);
    const cplx norm = linalg::inner(hi, w);
    for (auto& v : w) v /= norm;
    return w;
}

double sinr_of_weight(const ComplexMatrix& h, double noise_var, std::size_t i, std::span<const cplx> w) {
    const ComplexMatrix r = interference_covariance(h, noise_var, i);
    return 1.0 / std::real(linalg::inner(w, linalg::apply(r, w)));
}

std::vector<std::size_t> ml_detect(const ComplexMatrix& h, std::span<const cplx> y, const modem::Constellation& c) {
    require_channel(h);
    const std::size_t s = h.cols();
    const std::size_t nr = h.rows();
    const std::size_t m = c.size();
    if (y.size() != nr) throw ValidationError("ml: received vector length differs from receive dimension");
    double space = 1.0;
    for (std::size_t i = 0; i < s; ++i) space *= static_cast<double>(m);
    if (space > static_cast<double>(kMlSearchLimit))
        throw ValidationError("ml: search space " + std::to_string(m) + "^" + std::to_string(s) + " exceeds 2^20 candidates");

    // contrib[(i * m + p) * nr + r] = h(r, i) * point_p
    std::vector<cplx> contrib(s * m * nr);
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t p = 0; p < m; ++p)
            for (std::size_t r = 0; r < nr; ++r) contrib[(i * m + p) * nr + r] = h(r, i) * c.point(p);

    // Depth-first over streams; residual[d] is y minus the first d contributions.
    std::vector<CVector> residual(s + 1, CVector(nr));
    std::copy(y.begin(), y.end(), residual[0].begin());
    std::vector<std::size_t> idx(s, 0), best(s, 0);
    double best_d = std::numeric_limits<double>::infinity();

    std::size_t depth = 0;
    while (true) {
        const cplx* col = &contrib[(depth * m + idx[depth]) * nr];
        for (std::size_t r = 0; r < nr; ++r) residual[depth + 1][r] = residual[depth][r] - col[r];
        if (depth + 1 < s) {
            ++depth;
            idx[depth] = 0;
            continue;
        }
        const double d = linalg::norm2_squared(residual[s]);
        if (d < best_d) {
            best_d = d;
            best = idx;
        }
        while (true) {
            if (++idx[depth] < m) break;
            if (depth == 0) return best;
            --depth;
        }
    }
}

DetectionResult matched_filter_od(const ComplexMatrix& h, double noise_var, const stcode::OrthogonalDesign& od,
                                  const ComplexMatrix& y_block, const modem::Constellation* c) {
    require_channel(h);
    require_noise(noise_var);
    if (h.cols() != static_cast<std::size_t>(od.streams()))
        throw ValidationError("matched filter: design streams differ from effective-channel streams");
    if (y_block.rows() != h.rows() || y_block.cols() != static_cast<std::size_t>(od.block_length()))
        throw ValidationError("matched filter: received block must be nr x T");
    if (!od.is_orthogonal(1e-10)) throw ValidationError("matched filter: code is not an orthogonal design");

    const CVector y = stcode::stack_columns(y_block);
    const auto project = [&](const ComplexMatrix& disp) {
        const CVector g = stcode::stack_columns(h * disp);
        return std::real(linalg::inner(g, y)) / linalg::norm2_squared(g);
    };

    const double hf = h.frobenius_norm();
    const double gain = od.gram_scale() * hf * hf;
    DetectionResult r;
    r.soft.resize(od.symbols());
    for (std::size_t i = 0; i < od.symbols(); ++i)
        r.soft[i] = {project(od.re_dispersion()[i]), project(od.im_dispersion()[i])};
    r.sinr.assign(od.symbols(), gain / noise_var);
    if (c != nullptr) r.hard = slice_all(*c, r.soft);
    return r;
}

} // namespace bnmimo::detection
