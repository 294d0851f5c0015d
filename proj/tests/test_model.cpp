#include "oracles.hpp"

#include "rslq/instances.hpp"
#include "rslq/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace rslq;

namespace {

bool mentions(const ValidationReport& rep, const std::string& text)
{
    for (const auto& v : rep.violations) {
        if (v.find(text) != std::string::npos) return true;
    }
    return false;
}

ProblemSpec ramp_spec()
{
    auto spec = instances::scalar_analytic(4);
    std::vector<Mat> a;
    for (std::size_t k = 0; k <= 4; ++k) a.push_back(Mat::Constant(1, 1, static_cast<double>(k * k)));
    spec.regimes[0].A = MatSeries::per_node(a);
    return spec;
}

}  // namespace

TEST(TimeGrid, RejectsBadGrids)
{
    EXPECT_THROW(TimeGrid::make(1.0, 0.0, 10), InvalidInput);
    EXPECT_THROW(TimeGrid::make(0.0, 1.0, 1), InvalidInput);
    EXPECT_THROW(TimeGrid::make(0.0, std::numeric_limits<double>::infinity(), 10), InvalidInput);
}

TEST(TimeGrid, NodesIncreaseAndEndExactly)
{
    const auto g = TimeGrid::make(0.25, 1.5, 7);
    EXPECT_EQ(g.node(0), 0.25);
    EXPECT_EQ(g.node(7), 1.5);
    for (std::size_t k = 0; k < 7; ++k) EXPECT_LT(g.node(k), g.node(k + 1));
}

TEST(TimeGrid, LocateNodesAndInterior)
{
    const auto g = TimeGrid::make(0.0, 1.0, 10);
    for (std::size_t k = 0; k < 10; ++k) {
        const auto loc = g.locate(g.node(k));
        EXPECT_EQ(loc.cell, k);
        EXPECT_EQ(loc.frac, 0.0);
    }
    const auto end = g.locate(1.0);
    EXPECT_EQ(end.cell, 9u);
    EXPECT_EQ(end.frac, 1.0);
    const auto mid = g.locate(0.35);
    EXPECT_EQ(mid.cell, 3u);
    EXPECT_NEAR(mid.frac, 0.5, 1e-12);
    EXPECT_THROW(g.locate(-0.1), OutOfRange);
    EXPECT_THROW(g.locate(1.1), OutOfRange);
}

TEST(Validate, CatalogInstancesAreAdmissible)
{
    for (const auto& e : instances::catalog()) {
        const auto rep = validate(e.make(e.steps));
        EXPECT_TRUE(rep.ok()) << e.name << ": " << (rep.ok() ? "" : rep.violations.front());
    }
}

TEST(Validate, GeneratorRowSum)
{
    auto spec = instances::standard_two_regime(10);
    Mat lam = spec.gen.at_node(0);
    lam(0, 1) += 0.1;
    spec.gen.rates = MatSeries(lam);
    const auto rep = validate(spec);
    EXPECT_FALSE(rep.ok());
    EXPECT_TRUE(mentions(rep, "generator row sum"));
    EXPECT_THROW(require_valid(spec), InvalidInput);
}

TEST(Validate, GeneratorNegativeOffDiagonal)
{
    auto spec = instances::standard_two_regime(10);
    Mat lam(2, 2);
    lam << 1, -1, 2, -2;
    spec.gen.rates = MatSeries(lam);
    EXPECT_TRUE(mentions(validate(spec), "negative off-diagonal"));
}

TEST(Validate, AsymmetricR)
{
    auto spec = instances::redundant_control(10);
    Mat r = spec.regimes[0].R.at_node(0);
    r(0, 1) += 1e-3;
    spec.regimes[0].R = MatSeries(r);
    EXPECT_TRUE(mentions(validate(spec), "R not symmetric"));
}

TEST(Validate, ShapeAndFiniteness)
{
    auto spec = instances::standard_two_regime(10);
    spec.regimes[1].B = MatSeries(Mat::Zero(3, 1));
    EXPECT_TRUE(mentions(validate(spec), "shape mismatch: B(regime 1)"));

    spec = instances::standard_two_regime(10);
    Mat q = spec.regimes[0].Q.at_node(0);
    q(0, 0) = std::numeric_limits<double>::quiet_NaN();
    spec.regimes[0].Q = MatSeries(q);
    EXPECT_TRUE(mentions(validate(spec), "non-finite entry: Q(regime 0)"));

    spec = instances::scalar_analytic(10);
    spec.regimes[0].A = MatSeries::per_node(std::vector<Mat>(5, Mat::Zero(1, 1)));
    EXPECT_TRUE(mentions(validate(spec), "expected 1 or 11"));
}

TEST(CoeffAt, ExactAtNodes)
{
    const auto spec = ramp_spec();
    for (std::size_t k = 0; k <= 4; ++k) {
        const double t = spec.grid.node(k);
        EXPECT_EQ(coeff_at(spec, t, 0).A(0, 0), static_cast<double>(k * k));
        EXPECT_EQ(coeff_at_node(spec, k, 0).A(0, 0), static_cast<double>(k * k));
    }
}

TEST(CoeffAt, MidpointIsMeanOfNeighbours)
{
    const auto spec = ramp_spec();
    const double t = 0.5 * (spec.grid.node(1) + spec.grid.node(2));
    EXPECT_NEAR(coeff_at(spec, t, 0).A(0, 0), 0.5 * (1.0 + 4.0), 1e-14);
}

TEST(CoeffAt, ConstantSpecAnyTime)
{
    const auto spec = instances::standard_two_regime(10);
    const Mat A = spec.regimes[1].A.at_node(0);
    for (double t : {0.0, 0.013, 0.5, 0.77777, 1.0}) EXPECT_EQ(coeff_at(spec, t, 1).A, A);
}

TEST(CoeffAt, ContinuousAcrossNodes)
{
    const auto spec = ramp_spec();
    for (std::size_t k = 1; k < 4; ++k) {
        const double t = spec.grid.node(k);
        const double left = coeff_at(spec, t - 1e-9, 0).A(0, 0);
        const double right = coeff_at(spec, t + 1e-9, 0).A(0, 0);
        EXPECT_NEAR(left, right, 1e-6);
    }
}

TEST(CoeffAt, OutOfRange)
{
    const auto spec = instances::standard_two_regime(10);
    EXPECT_THROW(coeff_at(spec, -0.5, 0), OutOfRange);
    EXPECT_THROW(coeff_at(spec, 2.0, 0), OutOfRange);
    EXPECT_THROW(coeff_at(spec, 0.5, 2), OutOfRange);
}

TEST(HatTerms, ZeroPGivesRawWeights)
{
    const auto spec = instances::inhomogeneous_two_regime(10);
    const auto co = coeff_at_node(spec, 3, 0);
    const auto hat = hat_terms(co, SymMat::zero(spec.n));
    EXPECT_EQ(hat.S_hat, co.S);
    EXPECT_EQ(hat.R_hat.mat(), co.R);
}

TEST(HatTerms, ScalarSubstitution)
{
    const auto spec = instances::scalar_analytic(10);
    const auto co = coeff_at_node(spec, 0, 0);
    const double p = 0.37;
    const auto hat = hat_terms(co, SymMat(Mat::Constant(1, 1, p)));
    EXPECT_EQ(hat.S_hat(0, 0), p);
    EXPECT_EQ(hat.R_hat(0, 0), 1.0);
}

TEST(HatTerms, NoControlNoiseKeepsR)
{
    std::mt19937_64 rng(17);
    auto spec = instances::standard_two_regime(10);
    auto co = coeff_at_node(spec, 0, 0);
    co.D.setZero();
    for (int trial = 0; trial < 10; ++trial) {
        const SymMat p(oracle::random_matrix(rng, 2, 2, 2));
        EXPECT_EQ(hat_terms(co, p).R_hat.mat(), co.R);
    }
}

TEST(HatTerms, RHatSymmetricAndMatchesFormula)
{
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        CoeffAt co;
        co.A = oracle::random_matrix(rng, 3, 3, 3);
        co.B = oracle::random_matrix(rng, 3, 2, 2);
        co.C = oracle::random_matrix(rng, 3, 3, 3);
        co.D = oracle::random_matrix(rng, 3, 2, 2);
        co.S = oracle::random_matrix(rng, 2, 3, 2);
        co.R = oracle::random_spd(rng, 2, 0.1);
        const SymMat p(oracle::random_spd(rng, 3, 0.0));
        const auto hat = hat_terms(co, p);
        EXPECT_EQ(hat.R_hat.mat(), hat.R_hat.mat().transpose());
        const Mat P = p.mat();
        EXPECT_LE((hat.S_hat - (co.B.transpose() * P + co.D.transpose() * P * co.C + co.S)).norm(), 1e-12);
        EXPECT_LE((hat.R_hat.mat() - (co.R + co.D.transpose() * P * co.D)).norm(), 1e-12);
    }
}

TEST(HatTerms, ShapeMismatchThrows)
{
    const auto co = coeff_at_node(instances::standard_two_regime(10), 0, 0);
    EXPECT_THROW(hat_terms(co, SymMat::zero(3)), InvalidInput);
}

TEST(Homogeneous, ZeroesAffineData)
{
    const auto h = homogeneous(instances::inhomogeneous_two_regime(10));
    for (const auto& r : h.regimes) {
        EXPECT_TRUE(r.b.at_node(0).isZero(0.0));
        EXPECT_TRUE(r.sigma.at_node(0).isZero(0.0));
        EXPECT_TRUE(r.q.at_node(0).isZero(0.0));
        EXPECT_TRUE(r.rho.at_node(0).isZero(0.0));
        EXPECT_TRUE(r.g.isZero(0.0));
    }
}

TEST(WithSteps, RegridsConstantSpecsOnly)
{
    const auto spec = instances::standard_two_regime(10);
    EXPECT_EQ(with_steps(spec, 40).grid.steps, 40u);
    EXPECT_EQ(with_steps(spec, 40).regimes, spec.regimes);
    EXPECT_THROW(with_steps(instances::time_varying(10), 20), InvalidInput);
}
