#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "bnmimo/linalg.hpp"

namespace bnmimo::stcode {

using linalg::ComplexMatrix;
using linalg::cplx;
using linalg::CVector;

/// S = sum_i M_i x_i over `block_length` channel uses.
class LinearDispersionCode {
public:
    /// Diagonal-phase times cyclic-shift family:
    ///   M_(a,b) = D^a P_b / sqrt(streams),  a < streams, b < T,
    /// with D = diag(1, w, .., w^(streams-1)), w = exp(j 2 pi / streams), and
    /// P_b the streams x T selection with ones at (r, (r + b) mod T).
    static LinearDispersionCode generate(int streams, int block_length);

    LinearDispersionCode(int streams, int block_length, std::vector<ComplexMatrix> dispersion);

    int streams() const { return streams_; }
    int block_length() const { return block_length_; }
    std::size_t symbols() const { return dispersion_.size(); }
    const std::vector<ComplexMatrix>& dispersion() const { return dispersion_; }

    /// streams x T transmit block.
    ComplexMatrix encode(std::span<const cplx> x) const;

private:
    int streams_;
    int block_length_;
    std::vector<ComplexMatrix> dispersion_;
};

nlohmann::json to_json(const LinearDispersionCode& code);

/// vec(): stacks the columns (channel uses) of a block on top of each other.
CVector stack_columns(const ComplexMatrix& block);

/// (nr*T) x L matrix G with vec(Heff S) = G x; column i is vec(Heff M_i).
ComplexMatrix equivalent_channel(const ComplexMatrix& heff, const LinearDispersionCode& code);

enum class OdVariant { single, alamouti2, rate34_3ant, rate34_4ant };

/// Complex orthogonal design written as a real-linear code
///   S = sum_i (A_i Re x_i + B_i Im x_i),
/// normalised so that E||S||_F^2 = streams * T for unit-energy symbols.
class OrthogonalDesign {
public:
    static OrthogonalDesign make(OdVariant variant);
    /// Design used on `streams` virtual antennas (1..4).
    static OrthogonalDesign for_streams(int streams);
    /// Arbitrary real-linear code; used to exercise the orthogonality check.
    static OrthogonalDesign from_real_dispersion(int streams, int block_length,
                                                 std::vector<ComplexMatrix> re_part,
                                                 std::vector<ComplexMatrix> im_part);

    OdVariant variant() const { return variant_; }
    std::string name() const;
    int streams() const { return streams_; }
    int block_length() const { return block_length_; }
    std::size_t symbols() const { return re_.size(); }
    double rate() const { return static_cast<double>(symbols()) / block_length_; }

    const std::vector<ComplexMatrix>& re_dispersion() const { return re_; }
    const std::vector<ComplexMatrix>& im_dispersion() const { return im_; }

    ComplexMatrix encode(std::span<const cplx> x) const;

    /// Largest deviation from C_k C_l^H + C_l C_k^H = 2 c I delta_kl over all
    /// real dispersion pairs, relative to c.
    double orthogonality_defect() const { return defect_; }
    bool is_orthogonal(double tol = 1e-10) const { return defect_ <= tol; }
    /// c in S S^H = c (sum |x_i|^2) I.
    double gram_scale() const;

private:
    OrthogonalDesign() = default;
    double compute_defect() const;

    OdVariant variant_ = OdVariant::single;
    bool custom_ = false;
    int streams_ = 1;
    int block_length_ = 1;
    std::vector<ComplexMatrix> re_;
    std::vector<ComplexMatrix> im_;
    double defect_ = 0.0;
};

} // namespace bnmimo::stcode
