#include "westervelt/quadrature.hpp"
#include "westervelt/special.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>

using namespace westervelt;

namespace {

struct MlCase {
    double alpha, beta, z, value;
};

// reference values computed to 20 digits with mpmath
const MlCase kMlCases[] = {
    {0.6, 0.6, -0.3, 0.42314119084161668809},
    {0.6, 1.0, -0.3, 0.73218725509710487522},
    {0.6, 1.6, -0.3, 0.89270914967631711232},
    {0.5, 1.0, -20.0, 0.028174348741051319319},
    {0.6, 1.0, -10.0, 0.046589654426804280962},
    {0.8, 0.6, -30.0, -0.0057131058070576336615},
    {0.3, 0.3, -4.0, 0.010705694130905865792},
    {0.9, 1.9, -40.0, 0.024931413757555195988},
    {0.75, 0.5, -6.0, -0.031387033250988106237},
    {0.6, 0.2, -50.0, -0.0053685078930435409658},
    {0.4, 1.2, 2.5, 30953.763226390048518},
    {0.7, 1.4, -1.5, 0.43133290703155097768},
    {1.0, 3.0, -12.0, 0.076388931557030231446},
    {0.95, 1.0, -25.0, 0.0022247079107317235641},
};

}  // namespace

class MittagLefflerReference : public ::testing::TestWithParam<MlCase> {};

TEST_P(MittagLefflerReference, MatchesHighPrecisionValue)
{
    const auto& c = GetParam();
    const double v = mittag_leffler(c.alpha, c.beta, c.z);
    EXPECT_NEAR(v, c.value, 1e-10 * std::max(1.0, std::abs(c.value)))
        << "alpha=" << c.alpha << " beta=" << c.beta << " z=" << c.z;
}

INSTANTIATE_TEST_SUITE_P(Table, MittagLefflerReference, ::testing::ValuesIn(kMlCases),
                         [](const auto& info) { return "case" + std::to_string(info.index); });

TEST(MittagLeffler, ClosedForms)
{
    for (int i = 1; i <= 20; ++i) {
        const double t = 0.25 * i;
        const double z = -t;
        EXPECT_NEAR(mittag_leffler(1.0, 1.0, z), std::exp(z), 1e-10 * std::exp(z));
        EXPECT_NEAR(mittag_leffler(1.0, 2.0, z), std::expm1(z) / z, 1e-10 * std::abs(std::expm1(z) / z));
        EXPECT_NEAR(mittag_leffler(1.0, 1.0, t), std::exp(t), 1e-10 * std::exp(t));
        EXPECT_NEAR(mittag_leffler(2.0, 1.0, -t * t), std::cos(t), 1e-10);
    }
}

TEST(MittagLeffler, HalfOrderUsesErfc)
{
    // E_{1/2,1}(-x) = exp(x^2) erfc(x)
    for (double x : {0.1, 0.5, 1.0, 2.0}) {
        const double ref = std::exp(x * x) * std::erfc(x);
        EXPECT_NEAR(mittag_leffler(0.5, 1.0, -x), ref, 1e-10 * ref);
    }
}

TEST(MittagLeffler, ZeroArgumentIsReciprocalGamma)
{
    EXPECT_DOUBLE_EQ(mittag_leffler(0.6, 1.0, 0.0), 1.0);
    EXPECT_NEAR(mittag_leffler(0.6, 0.4, 0.0), 1.0 / 2.2181595437576880969, 1e-15);
}

TEST(MittagLeffler, RejectsInvalidArguments)
{
    EXPECT_THROW(mittag_leffler(0.0, 1.0, -1.0), ConfigError);
    EXPECT_THROW(mittag_leffler(0.5, 1.0, -51.0), ConfigError);
    EXPECT_THROW(mittag_leffler(0.5, NAN, -1.0), ConfigError);
}

TEST(Quadrature, RulesIntegratePolynomialsExactly)
{
    double s3 = 0.0, s5 = 0.0;
    for (int q = 0; q < quad::gauss3.n; ++q) s3 += quad::gauss3.w[q] * std::pow(quad::gauss3.x[q], 5);
    for (int q = 0; q < quad::gauss5.n; ++q) s5 += quad::gauss5.w[q] * std::pow(quad::gauss5.x[q], 9);
    EXPECT_NEAR(s3, 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(s5, 1.0 / 10.0, 1e-15);

    // reference triangle (0,0),(1,0),(0,1): int x^a y^b = a! b! / (a+b+2)!, area 1/2
    auto tri = [](const quad::RuleTri& r, int a, int b) {
        double s = 0.0;
        for (int q = 0; q < r.n; ++q) s += r.w[q] * std::pow(r.bary[q][1], a) * std::pow(r.bary[q][2], b);
        return 0.5 * s;
    };
    EXPECT_NEAR(tri(quad::tri4, 2, 1), 2.0 / 120.0, 1e-15);
    EXPECT_NEAR(tri(quad::tri4, 3, 0), 6.0 / 120.0, 1e-15);
    EXPECT_NEAR(tri(quad::tri7, 3, 2), 12.0 / 5040.0, 1e-15);
    EXPECT_NEAR(tri(quad::tri7, 5, 0), 120.0 / 5040.0, 1e-15);
}

TEST(Quadrature, AdaptiveHandlesEndpointSingularity)
{
    // int_0^1 s^(-0.6) ds = 2.5
    EXPECT_NEAR(quad::integrate([](double s) { return std::pow(s, -0.6); }, 0.0, 1.0, 1e-12), 2.5, 1e-10);
    EXPECT_NEAR(quad::integrate([](double s) { return std::sin(s); }, 0.0, std::numbers::pi), 2.0, 1e-13);
}

TEST(Quadrature, AdaptiveReportsExhaustedBudget)
{
    EXPECT_THROW(quad::integrate([](double s) { return 1.0 / s; }, 0.0, 1.0, 1e-12, 50), SolverError);
}
