#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "bnmimo/linalg.hpp"
#include "bnmimo/modem.hpp"
#include "bnmimo/stcode.hpp"

namespace bnmimo::detection {

using linalg::ComplexMatrix;
using linalg::cplx;
using linalg::CVector;

struct DetectionResult {
    CVector soft;                  // unbiased estimates, one per stream
    std::vector<double> sinr;      // linear, one per stream
    std::vector<std::size_t> hard; // constellation indices; empty if no constellation given
};

/// Unbiased linear MMSE receiver for y = H x + z, z ~ CN(0, noise_var I).
/// For stream i, with interference covariance R_I = H_I H_I^H + noise_var I:
///   sinr_i = h_i^H R_I^{-1} h_i,   w_i = R_I^{-1} h_i / sinr_i.
class MmseDetector {
public:
    MmseDetector(const ComplexMatrix& h, double noise_var);

    std::size_t streams() const { return sinr_.size(); }
    const std::vector<double>& sinr() const { return sinr_; }
    /// nr x streams; column i is w_i.
    const ComplexMatrix& weights() const { return weights_; }

    /// x_hat_i = w_i^H y.
    CVector equalize(std::span<const cplx> y) const;
    DetectionResult detect(std::span<const cplx> y, const modem::Constellation* c = nullptr) const;

private:
    ComplexMatrix weights_;
    ComplexMatrix weights_adj_;
    std::vector<double> sinr_;
};

DetectionResult mmse_detect(const ComplexMatrix& h, double noise_var, std::span<const cplx> y,
                            const modem::Constellation* c = nullptr);

/// Interference-plus-noise covariance of stream `i`, built from the other columns.
ComplexMatrix interference_covariance(const ComplexMatrix& h, double noise_var, std::size_t i);

/// Weight in the form (h_i h_i^H + R_I)^{-1} h_i / (h_i^H (h_i h_i^H + R_I)^{-1} h_i).
CVector mmse_weight_full_covariance(const ComplexMatrix& h, double noise_var, std::size_t i);

/// Residual-noise SINR of an arbitrary unbiased weight: 1 / (w^H R_I w).
double sinr_of_weight(const ComplexMatrix& h, double noise_var, std::size_t i, std::span<const cplx> w);

/// Largest number of candidate vectors ml_detect will enumerate.
inline constexpr std::size_t kMlSearchLimit = std::size_t{1} << 20;

/// Exhaustive argmin_x ||y - H x||^2 over the constellation; ties keep the
/// first candidate in lexicographic index order (stream 0 most significant).
std::vector<std::size_t> ml_detect(const ComplexMatrix& h, std::span<const cplx> y, const modem::Constellation& c);

/// Matched filter for an orthogonal design sent over `h` (nr x od.streams()).
/// `y_block` is nr x T. Each symbol sees the same real gain c ||h||_F^2, so
/// every entry of `sinr` equals c ||h||_F^2 / noise_var.
DetectionResult matched_filter_od(const ComplexMatrix& h, double noise_var, const stcode::OrthogonalDesign& od,
                                  const ComplexMatrix& y_block, const modem::Constellation* c = nullptr);

} // namespace bnmimo::detection
