#include "oracle_values.hpp"
#include "projem/errors.hpp"
#include "projem/projection_scheme.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace projem {
namespace {

ModelBundle cir_omega4() { return cir_model(0.5, 1.0, 0.5, 1.0); }

ProjectionPlan quarter_plan() {
    ProjectionPlan plan;
    plan.k = 0.25;
    plan.k_prime = 0.25;
    return plan;
}

TEST(Project, ClampsIntoBox) {
    EXPECT_DOUBLE_EQ(project(5.0, 16, quarter_plan()), 2.0);
    EXPECT_DOUBLE_EQ(project(0.1, 16, quarter_plan()), 0.5);
    EXPECT_DOUBLE_EQ(project(1.3, 16, quarter_plan()), 1.3);
}

TEST(Project, IdentityWithoutExponents) {
    const ProjectionPlan none;
    for (double x : {-1e9, -1.0, 0.0, 3.0, 1e12}) EXPECT_EQ(project(x, 1024, none), x);
}

TEST(Project, ScaleFactorsMoveTheBox) {
    ProjectionPlan plan = quarter_plan();
    plan.scale_lo = 0.01;
    plan.scale_hi = 3.0;
    const ProjectionBox box = projection_box(16, plan);
    EXPECT_DOUBLE_EQ(box.lo, 0.005);
    EXPECT_DOUBLE_EQ(box.hi, 6.0);
}

TEST(Project, SymmetricBox) {
    ProjectionPlan plan;
    plan.k_prime = 0.25;
    plan.symmetric = true;
    EXPECT_DOUBLE_EQ(project(-5.0, 16, plan), -2.0);
    EXPECT_DOUBLE_EQ(project(5.0, 16, plan), 2.0);
}

TEST(ProjectedDrift, RemovesSingularityAtZero) {
    const ModelBundle m = cir_omega4();
    ProjectionPlan plan;
    plan.k = 0.25;
    const ScalarFn fn = projected_drift(m.transformed, 16, plan);
    EXPECT_DOUBLE_EQ(fn(0.0), m.transformed.f(0.5));
    EXPECT_TRUE(std::isfinite(fn(-3.0)));
}

TEST(LipschitzBound, Arithmetic) {
    TransformedModel model = cir_omega4().transformed;
    model.lipschitz_constant = 1.0;
    ProjectionPlan plan;
    plan.k = 0.25;
    EXPECT_DOUBLE_EQ(lipschitz_bound(model, 16, plan), 10.0);
    model.beta = 0.0;
    EXPECT_DOUBLE_EQ(lipschitz_bound(model, 16, plan), 2.0);
}

TEST(PlanExponents, CirSmoothRegimeGivesHalf) {
    const ModelBundle m = cir_omega4();
    const ProjectionPlan plan = plan_exponents(m.transformed, Regularity::SmoothDrift, 7.0);
    EXPECT_DOUBLE_EQ(*plan.k, 0.25);
    EXPECT_FALSE(plan.k_prime);
    EXPECT_DOUBLE_EQ(*plan.rate, 0.5);
}

TEST(PlanExponents, MomentsRegimeApproachesOneSixth) {
    const ModelBundle m = cir_omega4();
    const ProjectionPlan plan = plan_exponents(m.transformed, Regularity::MomentsOnly, 4.0 + 1e-9);
    EXPECT_NEAR(*plan.rate, 1.0 / 6.0, 1e-9);
    EXPECT_GT(*plan.rate, 1.0 / 6.0);
    EXPECT_NEAR(*plan.k, 1.0 / 6.0, 1e-9);
}

TEST(PlanExponents, FirstOrderNeedsHighInverseMoments) {
    // omega = 4 allows q < 8 only, while first order needs q > 10.
    EXPECT_THROW(plan_exponents(cir_omega4().transformed, Regularity::SmoothDriftConstantDiffusion),
                 PlanInfeasible);
    const ModelBundle strong = cir_model(2.0, 1.0, 0.5, 1.0);  // omega = 16
    const ProjectionPlan plan =
        plan_exponents(strong.transformed, Regularity::SmoothDriftConstantDiffusion);
    EXPECT_DOUBLE_EQ(*plan.rate, 1.0);
    EXPECT_DOUBLE_EQ(*plan.k, 0.25);
}

TEST(PlanExponents, RejectsQOutsideMoments) {
    EXPECT_THROW(plan_exponents(cir_omega4().transformed, Regularity::SmoothDrift, 9.0),
                 PlanInfeasible);
    EXPECT_THROW(plan_exponents(cir_omega4().transformed, Regularity::SmoothDrift, 3.0),
                 PlanInfeasible);
}

TEST(PlanExponents, RegimeAboveModelRegularityIsInfeasible) {
    const ModelBundle gl = ginzburg_landau_model(0.5, 1.0, 1.0);
    EXPECT_THROW(plan_exponents(gl.transformed, Regularity::SmoothDriftConstantDiffusion),
                 PlanInfeasible);
}

TEST(PlanExponents, NoClampsGiveHalf) {
    TransformedModel model = ginzburg_landau_model(0.5, 1.0, 1.0).transformed;
    model.alpha = 0.0;
    const ProjectionPlan plan = plan_exponents(model, Regularity::SmoothDrift);
    EXPECT_FALSE(plan.k);
    EXPECT_FALSE(plan.k_prime);
    EXPECT_DOUBLE_EQ(*plan.rate, 0.5);
}

TEST(ManualPlan, ChecksExponentCondition) {
    EXPECT_NO_THROW(manual_plan(cir_omega4().transformed, 0.25, std::nullopt));
    EXPECT_THROW(manual_plan(cir_omega4().transformed, 0.3, std::nullopt), PlanInfeasible);
    EXPECT_THROW(manual_plan(cir_omega4().transformed, std::nullopt, std::nullopt), PlanInfeasible);
    const ProjectionPlan plan = manual_plan(cir_omega4().transformed, 0.25, 0.1);
    EXPECT_FALSE(plan.k_prime);  // alpha = 0 has no upper clamp
    EXPECT_FALSE(plan.rate);
}

TEST(Step, FixedPointWithZeroDriftAndNoise) {
    TransformedModel model = ginzburg_landau_model(0.0, 0.0, 1.0).transformed;
    EXPECT_DOUBLE_EQ(step(0.0, model, 8, ProjectionPlan{}, 0.1, 0.0), 0.0);
}

TEST(Step, CirDeterministicStep) {
    const ModelBundle m = cir_omega4();
    ProjectionPlan plan;
    plan.k = 0.25;
    EXPECT_DOUBLE_EQ(step(1.0, m.transformed, 16, plan, 1.0 / 16.0, 0.0), 0.998046875);
}

TEST(Step, ThrowsOnOverflow) {
    const ModelBundle gl = ginzburg_landau_model(0.0, 1.0, 1.0);
    EXPECT_THROW(classical_step(1e200, gl.transformed, 1.0, 0.0), NonFinite);
    EXPECT_THROW(step(1e200, gl.transformed, 8, ProjectionPlan{}, 1.0, 0.0), NonFinite);
}

TEST(SimulatePath, NodesAndFirstStep) {
    const ModelBundle m = cir_omega4();
    ProjectionPlan plan;
    plan.k = 0.25;
    const std::vector<double> dw{0.3};
    const auto path = simulate_path(m.transformed, SchemeGrid(1.0, 1), plan, dw);
    ASSERT_EQ(path.size(), 2u);
    EXPECT_DOUBLE_EQ(path[1], step(1.0, m.transformed, 1, plan, 1.0, 0.3));
}

TEST(SimulatePath, ZeroNoiseZeroDriftIsConstant) {
    const ModelBundle gl = ginzburg_landau_model(0.0, 0.0, 0.0 + 1.0);
    TransformedModel model = gl.transformed;
    model.drift = CubicDrift{0.0};
    model.y0 = 0.0;
    const std::vector<double> dw(8, 0.0);
    for (double v : simulate_path(model, SchemeGrid(1.0, 8), ProjectionPlan{}, dw)) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(SimulatePath, LengthMismatch) {
    const ModelBundle m = cir_omega4();
    const std::vector<double> dw(3, 0.0);
    EXPECT_THROW(simulate_path(m.transformed, SchemeGrid(1.0, 4), ProjectionPlan{}, dw),
                 LengthMismatch);
}

TEST(Stepper, MatchesSimulatePath) {
    const ModelBundle m = cir_omega4();
    ProjectionPlan plan;
    plan.k = 0.25;
    const std::vector<double> dw{0.1, -0.4, 0.05, -0.2, 0.3, 0.0, -0.1, 0.2};
    const auto path = simulate_path(m.transformed, SchemeGrid(1.0, 8), plan, dw);
    const Stepper stepper(m.transformed, plan, SchemeVariant::Modified, 8, 1.0 / 8.0);
    EXPECT_EQ(stepper.terminal(1.0, dw), path.back());
}

TEST(ClampVariant, ReadOuts) {
    ProjectionPlan plan;
    EXPECT_EQ(clamp_variant(-0.3, Readout::Bar, plan, 0.01), 0.0);
    EXPECT_EQ(clamp_variant(-0.3, Readout::Raw, plan, 0.01), -0.3);
    EXPECT_THROW(clamp_variant(-0.3, Readout::Tilde, plan, 0.01), MissingThreshold);
    plan.rate = 0.5;
    plan.q = 6.0;
    plan.q_prime = 12.0;
    const double h = std::ldexp(1.0, -8);
    EXPECT_NEAR(*plan.eta(h), oracle::kEtaQ6, 1e-15);
    EXPECT_DOUBLE_EQ(clamp_variant(0.0, Readout::Tilde, plan, h), *plan.eta(h));
    EXPECT_DOUBLE_EQ(clamp_variant(0.5, Readout::Double, plan, h), 0.5);
    EXPECT_DOUBLE_EQ(clamp_variant(1e9, Readout::Check, plan, h), *plan.zeta(h));
}

TEST(Parsing, VariantNames) {
    EXPECT_EQ(parse_variant("classical"), SchemeVariant::Classical);
    EXPECT_EQ(parse_readout("double"), Readout::Double);
    EXPECT_THROW(parse_readout("nope"), ConfigError);
}

}  // namespace
}  // namespace projem
