#include <gtest/gtest.h>

#include <cmath>

#include "bnmimo/channel.hpp"
#include "bnmimo/errors.hpp"
#include "bnmimo/schemes.hpp"
#include "oracles.hpp"

using namespace bnmimo;
using namespace bnmimo::schemes;
using linalg::ComplexMatrix;

TEST(Channel, SubstreamsAreReproducibleAndDistinct) {
    auto a = channel::substream(42, 7, channel::Stream::channel);
    auto b = channel::substream(42, 7, channel::Stream::channel);
    auto c = channel::substream(42, 7, channel::Stream::noise);
    auto d = channel::substream(42, 8, channel::Stream::channel);
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
    EXPECT_NE(x, d());
}

TEST(Channel, SampleIsReplayable) {
    const channel::ChannelConfig cfg{3, 4, 99};
    const auto a = channel::sample_channel(cfg, 12);
    const auto b = channel::sample_channel(cfg, 12);
    EXPECT_TRUE(a.h == b.h);
    EXPECT_EQ(a.h.rows(), 4u);
    EXPECT_EQ(a.h.cols(), 3u);
    EXPECT_EQ(a.trial_index, 12u);
}

TEST(Channel, GaussianMoments) {
    auto rng = channel::substream(1, 0, channel::Stream::oracle);
    const int n = 200000;
    double re = 0, im = 0, p = 0, cross = 0;
    for (int i = 0; i < n; ++i) {
        const auto z = channel::complex_gaussian(rng, 2.0);
        re += z.real();
        im += z.imag();
        p += std::norm(z);
        cross += z.real() * z.imag();
    }
    EXPECT_NEAR(re / n, 0.0, 0.01);
    EXPECT_NEAR(im / n, 0.0, 0.01);
    EXPECT_NEAR(p / n, 2.0, 0.02);
    EXPECT_NEAR(cross / n, 0.0, 0.01);
}

TEST(Channel, ValidateAntennaCounts) {
    EXPECT_THROW((channel::ChannelConfig{0, 1, 1}.validate()), ValidationError);
    EXPECT_THROW((channel::ChannelConfig{3, 2, 1}.validate()), ValidationError);
    EXPECT_NO_THROW((channel::ChannelConfig{2, 3, 1}.validate()));
}

TEST(Channel, SnrConversion) {
    EXPECT_NEAR(channel::SnrPoint::from_db(10).rho, 10.0, 1e-12);
    EXPECT_NEAR(channel::SnrPoint::from_linear(100).rho_db, 20.0, 1e-12);
}

TEST(SchemeSpec, ParseAndName) {
    for (const char* n : {"eq", "wf", "bf", "bn", "mdbf2", "mdbn3"}) EXPECT_EQ(SchemeSpec::parse(n).name(), n);
    EXPECT_EQ(SchemeSpec::parse("MD-BN2").name(), "mdbn2");
    EXPECT_THROW(SchemeSpec::parse("xx"), ValidationError);
    EXPECT_THROW(SchemeSpec::parse("mdbn"), ValidationError);
}

TEST(SchemeSpec, Validation) {
    EXPECT_THROW(SchemeSpec::parse("bn").validate(1), ValidationError);
    EXPECT_THROW(SchemeSpec::parse("mdbn3").validate(5), ValidationError);
    EXPECT_NO_THROW(SchemeSpec::parse("mdbn2").validate(5));
    EXPECT_EQ(SchemeSpec::parse("mdbn2").streams(5), 3);
    EXPECT_EQ(SchemeSpec::parse("bn").streams(4), 3);
    EXPECT_EQ(SchemeSpec::parse("mdbf2").streams(5), 2);
}

namespace {

// Determinant form log2 det(I + (1/nv) H F F^H H^H) on the built effective channel.
double det_capacity(const SchemeSpec& spec, const ComplexMatrix& h, double rho) {
    const auto s = linalg::svd(h);
    const double nv = 1.0 / rho;
    return oracle::log2_det_gram(h * precoder(spec, s, nv), 1.0 / nv);
}

} // namespace

TEST(Capacity, MatchesDeterminantOracle) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 200; ++t) {
        const int nt = 2 + t % 4;
        const auto h = oracle::random_matrix(rng, nt + t % 2, nt);
        const auto s = linalg::svd(h);
        const double rho = std::pow(10.0, (t % 30 - 5) / 10.0);
        std::vector<std::string> names{"eq", "wf", "bf", "bn"};
        for (int k = 1; k <= nt / 2; ++k) {
            names.push_back("mdbf" + std::to_string(k));
            names.push_back("mdbn" + std::to_string(k));
        }
        for (const auto& n : names) {
            const auto spec = SchemeSpec::parse(n);
            const double c = capacity_nats(spec, s.sigma, rho, nt) / std::log(2.0);
            EXPECT_NEAR(c, det_capacity(spec, h, rho), 1e-9) << n << " nt=" << nt;
        }
    }
}

TEST(Capacity, BnEqualsDeterminantOnComplement5x5) {
    std::mt19937_64 rng(5);
    const auto h = oracle::random_matrix(rng, 5, 5);
    const auto s = linalg::svd(h);
    const auto phi = linalg::orthonormal_complement(s.v.columns(4, 1));
    const double rho = 10.0;
    EXPECT_NEAR(capacity_bn(s.sigma, rho, 5), oracle::log2_det_gram(h * phi, rho / 4), 1e-9);
    const auto phi2 = linalg::orthonormal_complement(s.v.columns(3, 2));
    EXPECT_NEAR(capacity_md_bn(s.sigma, rho, 5, 2), oracle::log2_det_gram(h * phi2, rho / 3), 1e-9);
}

TEST(Capacity, TwoAntennaBfEqualsBn) {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 500; ++t) {
        const auto s = linalg::svd(oracle::random_matrix(rng, 2, 2));
        const double rho = std::pow(10.0, (t % 40 - 10) / 10.0);
        EXPECT_LE(std::abs(capacity_bf(s.sigma, rho) - capacity_bn(s.sigma, rho, 2)), 1e-9);
    }
}

TEST(Capacity, SingleAntennaEqEqualsWf) {
    const std::vector<double> sigma{1.3};
    for (double rho : {0.1, 1.0, 10.0})
        EXPECT_NEAR(capacity_equal(sigma, rho, 1), capacity_wf(sigma, 1.0, 1.0 / rho), 1e-12);
}

TEST(Capacity, KnownValues) {
    const std::vector<double> sigma{2.0, 1.0, 0.5};
    // log2(1 + rho/3 * l^2) summed
    EXPECT_NEAR(capacity_equal(sigma, 3.0, 3), std::log2(5.0) + std::log2(2.0) + std::log2(1.25), 1e-12);
    EXPECT_NEAR(capacity_bf(sigma, 1.0), std::log2(5.0), 1e-12);
    EXPECT_NEAR(capacity_bn(sigma, 2.0, 3), std::log2(5.0) + std::log2(2.0), 1e-12);
    EXPECT_NEAR(capacity_md_bn(sigma, 3.0, 3, 0), capacity_equal(sigma, 3.0, 3), 1e-15);
}

TEST(Capacity, RejectsBadSingularValues) {
    const std::vector<double> asc{0.5, 1.0};
    EXPECT_THROW(capacity_equal(asc, 1.0, 2), ValidationError);
    const std::vector<double> empty;
    EXPECT_THROW(capacity_nats(SchemeSpec::parse("eq"), empty, 1.0, 1), ValidationError);
    const std::vector<double> ok{1.0, 0.5};
    EXPECT_THROW(capacity_nats(SchemeSpec::parse("eq"), ok, -1.0, 2), ValidationError);
}

TEST(WaterFilling, MatchesBisectionOracle) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 300; ++t) {
        const int nt = 1 + t % 6;
        const auto s = linalg::svd(oracle::random_matrix(rng, nt, nt));
        const double nv = std::pow(10.0, -(t % 40 - 10) / 10.0);
        const auto a = waterfill(s.sigma, 1.0, nv);
        const auto ref = oracle::waterfill_bisection(s.sigma, 1.0, nv);
        for (int i = 0; i < nt; ++i) EXPECT_NEAR(a.per_subchannel[i], ref[i], 1e-9);
        EXPECT_LE(waterfill_kkt_residual(s.sigma, a, 1.0, nv), 1e-9);
    }
}

TEST(WaterFilling, KktDetectsBadAllocation) {
    const std::vector<double> sigma{2.0, 1.0};
    EXPECT_GT(waterfill_kkt_residual(sigma, PowerAllocation{{0.5, 0.5}}, 1.0, 1.0), 1e-3);
}

TEST(WaterFilling, LowSnrUsesOnlyStrongest) {
    const std::vector<double> sigma{2.0, 1.0, 0.5};
    const auto a = waterfill(sigma, 1.0, 10.0);
    EXPECT_NEAR(a.per_subchannel[0], 1.0, 1e-12);
    EXPECT_EQ(a.per_subchannel[1], 0.0);
    EXPECT_NEAR(capacity_wf(sigma, 1.0, 10.0), capacity_bf(sigma, 0.1), 1e-12);
}

TEST(Slope, MatchesFiniteDifference) {
    const std::vector<double> sigma{2.1, 1.4, 0.6, 0.2, 0.05};
    for (const char* n : {"eq", "bf", "bn", "mdbf2", "mdbn2"}) {
        const auto spec = SchemeSpec::parse(n);
        for (double rho : {0.3, 3.0, 30.0}) {
            const double h = 1e-5 * rho;
            const double fd = (capacity_nats(spec, sigma, rho + h, 5) - capacity_nats(spec, sigma, rho - h, 5)) / (2 * h);
            EXPECT_NEAR(capacity_slope(spec, sigma, rho, 5), fd, 1e-7 * std::max(1.0, fd)) << n;
        }
    }
    EXPECT_THROW(capacity_slope(SchemeSpec::parse("wf"), sigma, 1.0, 5), ValidationError);
}

TEST(Slope, CurveOnQuadratic) {
    std::vector<double> c;
    for (int i = 0; i < 6; ++i) c.push_back(0.5 * i * i);
    const auto d = slope_curve(c, 1.0);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(d[i], i, 1e-12);
}

TEST(Precoder, ShapesAndPower) {
    std::mt19937_64 rng(8);
    const auto h = oracle::random_matrix(rng, 5, 5);
    const auto s = linalg::svd(h);
    const std::vector<std::pair<std::string, std::size_t>> cases{{"eq", 5}, {"bf", 1}, {"bn", 4}, {"mdbf2", 2}, {"mdbn2", 3}};
    for (const auto& [n, cols] : cases) {
        const auto f = precoder(SchemeSpec::parse(n), s, 0.1);
        EXPECT_EQ(f.cols(), cols) << n;
        EXPECT_NEAR(f.frobenius_norm() * f.frobenius_norm(), 1.0, 1e-12) << n;
    }
    const auto wf = precoder(SchemeSpec::parse("wf"), s, 0.1);
    EXPECT_NEAR(wf.frobenius_norm() * wf.frobenius_norm(), 1.0, 1e-12);
}

TEST(Precoder, BeamNullingRotationIsUnitary) {
    std::mt19937_64 rng(10);
    for (int t = 0; t < 100; ++t) {
        const int nt = 3 + t % 4;
        const int k = 1 + t % (nt / 2);
        const auto s = linalg::svd(oracle::random_matrix(rng, nt, nt));
        const auto phi = linalg::orthonormal_complement(s.v.columns(nt - k, k));
        const auto b = s.v.columns(0, nt - k).adjoint() * phi;
        EXPECT_LT(linalg::gram_deviation(b), 1e-10);
    }
}
