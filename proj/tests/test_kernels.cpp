#include "westervelt/kernels.hpp"

#include <gtest/gtest.h>

#include <cctype>
#include <cmath>
#include <string>
#include <vector>

using namespace westervelt;

TEST(KernelSpec, Validation)
{
    EXPECT_NO_THROW(KernelSpec::delta().validate());
    EXPECT_THROW(KernelSpec::abel(0.0), ConfigError);
    EXPECT_THROW(KernelSpec::abel(1.0), ConfigError);
    EXPECT_THROW(KernelSpec::mittag_leffler(1.5, MlBeta::One), ConfigError);
    EXPECT_THROW(KernelSpec::mittag_leffler(0.4, MlBeta::TwoAlphaMinusOne), ConfigError);
    EXPECT_NO_THROW(KernelSpec::mittag_leffler(1.0, MlBeta::TwoAlphaMinusOne));
    EXPECT_EQ(KernelSpec::delta().eta(), 0);
    EXPECT_EQ(KernelSpec::abel(0.5).eta(), 1);
    EXPECT_DOUBLE_EQ(KernelSpec::mittag_leffler(0.7, MlBeta::TwoAlphaMinusOne).beta(), 0.4);
}

TEST(Kernel, AbelValues)
{
    const auto k = KernelSpec::abel(0.6);
    EXPECT_NEAR(kernel_value(k, 0.25), 1.0357220320149512742, 1e-14);
    EXPECT_NEAR(kernel_integral(k, 0.01), 0.17862705107498875508, 1e-15);
    EXPECT_THROW((void)kernel_value(k, 0.0), ConfigError);
    EXPECT_THROW((void)kernel_value(KernelSpec::delta(), 1.0), ConfigError);
}

TEST(Kernel, MittagLefflerWithUnitAlphaIsExponential)
{
    const auto k = KernelSpec::mittag_leffler(1.0, MlBeta::One);
    for (double t : {0.01, 0.3, 2.0, 7.0}) {
        EXPECT_NEAR(kernel_value(k, t), std::exp(-t), 1e-12);
        EXPECT_NEAR(kernel_integral(k, t), -std::expm1(-t), 1e-12);
    }
}

TEST(Kernel, PrimitiveMatchesQuadrature)
{
    const KernelSpec ks[] = {KernelSpec::abel(0.3), KernelSpec::mittag_leffler(0.6, MlBeta::One),
                             KernelSpec::mittag_leffler(0.6, MlBeta::Alpha),
                             KernelSpec::mittag_leffler(0.8, MlBeta::TwoAlphaMinusOne)};
    for (const auto& k : ks) {
        for (double t : {0.05, 0.5, 3.0}) {
            EXPECT_NEAR(kernel_integral(k, t), kernel_integral_quadrature(k, 0.0, t, 1e-12), 1e-9) << k.name();
        }
    }
}

TEST(Kernel, Norms)
{
    EXPECT_DOUBLE_EQ(kernel_norm(KernelSpec::delta(), 3.0), 1.0);
    const auto k = KernelSpec::abel(0.6);
    EXPECT_NEAR(kernel_norm(k, 1.0), kernel_integral(k, 1.0), 1e-9);
}

TEST(ConvWeights, DeltaIsIdentity)
{
    const auto w = l1_weights(KernelSpec::delta(), 0.1, 10);
    EXPECT_TRUE(w.identity());
    EXPECT_EQ(w.weight(4, 4), 1.0);
    EXPECT_EQ(w.weight(4, 3), 0.0);
    EXPECT_THROW((void)w.negated(), ConfigError);
}

TEST(ConvWeights, LagIntegralsTelescope)
{
    const auto k = KernelSpec::abel(0.4);
    const double dt = 0.01;
    const auto w = l1_weights(k, dt, 50);
    double s = 0.0;
    for (std::size_t m = 0; m < 50; ++m) {
        EXPECT_GT(w.lag_integral(m), 0.0);
        s += w.lag_integral(m);
    }
    EXPECT_NEAR(s, kernel_integral(k, 0.5), 1e-13);
    // row sums reproduce the primitive for constant samples
    double row = 0.0;
    for (std::size_t i = 0; i <= 20; ++i) row += w.weight(20, i);
    EXPECT_NEAR(row, kernel_integral(k, 0.2), 1e-13);
    EXPECT_EQ(w.weight(0, 0), 0.0);
    EXPECT_THROW((void)w.weight(51, 3), ConfigError);
    EXPECT_THROW((void)l1_weights(k, 0.0, 3), ConfigError);
}

TEST(L1Caputo, LinearFunctionIsExact)
{
    // Caputo derivative of y = t is t^(1-alpha)/Gamma(2-alpha); y' = 1 is reproduced by the trapezoid
    for (double alpha : {0.2, 0.6, 0.8}) {
        const auto k = KernelSpec::abel(alpha);
        const double dt = 1.0 / 64;
        const auto w = l1_weights(k, dt, 64);
        const std::vector<double> v(65, 1.0);
        for (std::size_t n = 1; n <= 64; ++n) {
            const double t = static_cast<double>(n) * dt;
            const double exact = std::pow(t, 1.0 - alpha) / std::tgamma(2.0 - alpha);
            EXPECT_NEAR(w.convolve(n, v), exact, 1e-12);
        }
    }
}

TEST(L1Caputo, CubicConvergesAtLeastLinearly)
{
    const double alpha = 0.6;
    const auto k = KernelSpec::abel(alpha);
    const double exact = 6.0 / std::tgamma(4.0 - alpha);  // at t = 1
    double prev = 0.0;
    for (int n : {16, 32, 64, 128, 256}) {
        const double dt = 1.0 / n;
        const auto w = l1_weights(k, dt, static_cast<std::size_t>(n));
        std::vector<double> v(static_cast<std::size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) v[i] = 3.0 * (i * dt) * (i * dt);
        const double err = std::abs(w.convolve(static_cast<std::size_t>(n), v) - exact);
        if (prev > 0.0) {
            EXPECT_GE(std::log2(prev / err), 1.0);
        }
        prev = err;
    }
}

class Positivity : public ::testing::TestWithParam<KernelSpec> {};

TEST_P(Positivity, HoldsAt128Steps)
{
    const auto rep = check_positivity(GetParam(), 0.25 / 128, 128);
    EXPECT_TRUE(rep.pass) << GetParam().name() << " min eigenvalue " << rep.min_eigenvalue;
    EXPECT_GT(rep.norm, 0.0);
}

INSTANTIATE_TEST_SUITE_P(AllKernels, Positivity,
                         ::testing::Values(KernelSpec::delta(), KernelSpec::abel(0.2), KernelSpec::abel(0.4),
                                           KernelSpec::abel(0.6), KernelSpec::abel(0.8),
                                           KernelSpec::mittag_leffler(0.6, MlBeta::One),
                                           KernelSpec::mittag_leffler(0.6, MlBeta::Alpha),
                                           KernelSpec::mittag_leffler(0.6, MlBeta::TwoAlphaMinusOne)),
                         [](const auto& info) {
                             std::string n = info.param.name();
                             for (char& ch : n) {
                                 if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
                             }
                             return n + "_" + std::to_string(info.index);
                         });

TEST(Positivity, NegatedKernelFails)
{
    const auto w = l1_weights(KernelSpec::abel(0.6), 0.25 / 128, 128).negated();
    EXPECT_FALSE(check_positivity(w, 128).pass);
}

TEST(Positivity, RejectsOversizedHorizon)
{
    EXPECT_THROW(check_positivity(KernelSpec::abel(0.5), 0.01, 513), ConfigError);
    EXPECT_THROW(check_positivity(KernelSpec::abel(0.5), 0.01, 0), ConfigError);
}
