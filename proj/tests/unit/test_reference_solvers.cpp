#include "oracle_values.hpp"
#include "projem/reference_solvers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace projem {
namespace {

const ImplicitCirParams kOmega4 = ImplicitCirParams::from_cir(0.5, 1.0, 0.5, 1.0);

TEST(ImplicitCir, CoefficientsFromCir) {
    EXPECT_DOUBLE_EQ(kOmega4.a, 0.21875);
    EXPECT_DOUBLE_EQ(kOmega4.b, -0.25);
    EXPECT_DOUBLE_EQ(kOmega4.c, 0.25);
    EXPECT_DOUBLE_EQ(kOmega4.y0, 1.0);
}

TEST(ImplicitCir, StepOracles) {
    EXPECT_NEAR(implicit_cir_step(1.0, kOmega4, std::ldexp(1.0, -12), 0.0),
                oracle::kImplicitStepOmega4, 1e-15);
    EXPECT_NEAR(implicit_cir_step(0.3, kOmega4, 1.0 / 64.0, -0.2), oracle::kImplicitStepNoisy,
                1e-15);
}

TEST(ImplicitCir, ResidualVanishes) {
    for (double y : {1e-4, 0.1, 1.0, 5.0}) {
        for (double dw : {-1.0, -0.1, 0.0, 0.4}) {
            const double h = 0.01;
            const double z = implicit_cir_step(y, kOmega4, h, dw);
            ASSERT_GT(z, 0.0);
            const double residual = z - (y + (kOmega4.a / z + kOmega4.b * z) * h + kOmega4.c * dw);
            EXPECT_LE(std::abs(residual), 1e-10 * (1 + std::abs(z)));
        }
    }
}

TEST(ImplicitCir, SquareRootCollapsesWithoutReciprocalTerm) {
    const ImplicitCirParams p{0.0, -0.5, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(implicit_cir_step(1.0, p, 0.1, 0.2), 1.2 / 1.05);
}

TEST(ImplicitCir, FromModelRequiresReciprocalLinearDrift) {
    const ImplicitCirParams p = ImplicitCirParams::from_model(cir_model(0.5, 1.0, 0.5, 1.0).transformed);
    EXPECT_EQ(p.a, kOmega4.a);
    EXPECT_THROW(ImplicitCirParams::from_model(ginzburg_landau_model(0.5, 1.0, 1.0).transformed),
                 Error);
}

TEST(GinzburgLandauExact, StartsAtInitialValue) {
    const std::vector<double> W(5, 0.0);
    const auto path = ginzburg_landau_exact(0.5, 1.0, 1.3, SchemeGrid(1.0, 4), W);
    EXPECT_EQ(path.front(), 1.3);
}

TEST(GinzburgLandauExact, NoiseFreeWithoutGrowth) {
    const std::size_t n = 1 << 16;
    const std::vector<double> dw(n, 0.0);
    const double x = ginzburg_landau_exact_terminal(0.0, 0.0, 1.0, 1.0, dw);
    EXPECT_NEAR(x, 1.0 / std::sqrt(3.0), 1e-12);
}

TEST(GinzburgLandauExact, NoiseFreeMatchesOdeSolution) {
    const std::size_t n = 1 << 16;
    const std::vector<double> dw(n, 0.0);
    EXPECT_NEAR(ginzburg_landau_exact_terminal(0.5, 0.0, 1.0, 1.0, dw),
                oracle::kGinzburgLandauDeterministic, 1e-4);
}

TEST(GinzburgLandauExact, PathAndTerminalAgree) {
    const std::vector<double> dw{0.1, -0.3, 0.2, 0.05};
    std::vector<double> W{0.0};
    for (double v : dw) W.push_back(W.back() + v);
    const auto path = ginzburg_landau_exact(0.5, 1.0, 1.0, SchemeGrid(1.0, 4), W);
    EXPECT_NEAR(path.back(), ginzburg_landau_exact_terminal(0.5, 1.0, 1.0, 1.0, dw), 1e-14);
}

TEST(CirZcb, FrozenPrice) {
    EXPECT_NEAR(cir_zcb_closed_form(2.0, 1.0, 0.5, 1.0, 1.0), oracle::kZcbPrice, 1e-15);
}

TEST(CirZcb, ZeroMaturity) {
    EXPECT_DOUBLE_EQ(cir_zcb_closed_form(2.0, 1.0, 0.5, 1.0, 0.0), 1.0);
}

TEST(CirZcb, DeterministicLimit) {
    // Without noise v(t) = theta + (v0 - theta) e^{-kappa t}; integrate in closed form.
    const double kappa = 2.0, theta = 1.0, v0 = 0.3, T = 1.5;
    const double integral = theta * T + (v0 - theta) * (1 - std::exp(-kappa * T)) / kappa;
    EXPECT_NEAR(cir_zcb_closed_form(kappa, theta, 1e-6, v0, T), std::exp(-integral), 1e-9);
}

}  // namespace
}  // namespace projem
