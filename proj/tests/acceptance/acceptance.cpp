// Acceptance runner: one PASS/FAIL line per criterion.
// Usage: projem_acceptance [--criterion N]...   (all criteria when none are given)

#include "determinism_check.hpp"
#include "property_checks.hpp"
#include "projem/config.hpp"
#include "projem/convergence.hpp"
#include "projem/errors.hpp"
#include "projem/mlmc.hpp"
#include "projem/reference_solvers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace projem;

struct Outcome {
    bool passed = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        passed = passed && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [FAIL]");
    }
};

std::string fmt(const char* format, double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, format, value);
    return buffer;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

ExperimentConfig load(const std::string& name) {
    return load_config(std::string(PROJEM_SOURCE_DIR) + "/configs/" + name);
}

ConvergenceReport run_study(const ExperimentConfig& cfg) {
    const ModelBundle model = make_model(cfg.model.family, cfg.model.params);
    const ProjectionPlan plan = build_plan(model.transformed, cfg.scheme);
    return run_convergence_study(model, plan, make_study_spec(cfg), BrownianFabric(cfg.seed));
}

std::size_t flagged(const ConvergenceReport& report) {
    std::size_t n = 0;
    for (const auto& r : report.records) n += r.diverged ? 1 : 0;
    return n;
}

// Criterion tolerances.
constexpr double kCirRateFloor = 0.45;
constexpr double kCirRSquaredFloor = 0.95;
constexpr double kCirSeconds = 120.0;
constexpr double kGlRateLo = 0.40;
constexpr double kGlRateHi = 0.65;
constexpr double kGlSeconds = 60.0;
constexpr double kGlModifiedRateLo = 0.25;
constexpr double kGlModifiedRateHi = 0.60;
constexpr double kAitSahaliaRateFloor = 0.9;
constexpr double kZcbSavingsFloor = 10.0;
constexpr double kZcbSeconds = 600.0;
constexpr double kSpreadSavingsFloor = 8.0;
constexpr double kSpreadStdErrors = 3.0;
constexpr double kPropertySeconds = 60.0;
constexpr double kZ95 = 1.959963984540054;

// Published spread prices with their 95% half-widths.
constexpr double kSpreadUncorrelated = 0.00310063;
constexpr double kSpreadUncorrelatedHalfWidth = 0.00000267;
constexpr double kSpreadCorrelated = 0.003711;
constexpr double kSpreadCorrelatedHalfWidth = 0.0000032;

Outcome criterion_cir() {
    Outcome o;
    for (const char* name : {"cir_convergence_omega35.json", "cir_convergence.json"}) {
        ExperimentConfig cfg = load(name);
        cfg.threads = 1;
        const double omega = 2 * cfg.model.params.at("kappa") * cfg.model.params.at("theta") /
                             std::pow(cfg.model.params.at("xi"), 2);
        const Stopwatch clock;
        const ConvergenceReport report = run_study(cfg);
        const double secs = clock.seconds();
        const std::string tag = "omega=" + fmt("%g", omega);
        if (!report.fit) {
            o.check(false, tag + " no fit");
            continue;
        }
        o.check(report.fit->slope >= kCirRateFloor, tag + " rate " + fmt("%.3f", report.fit->slope));
        o.check(report.fit->r_squared >= kCirRSquaredFloor, "R^2 " + fmt("%.4f", report.fit->r_squared));
        o.check(secs <= kCirSeconds, fmt("%.1fs", secs));
    }
    return o;
}

Outcome criterion_gl_rate() {
    Outcome o;
    const Stopwatch clock;
    const ConvergenceReport report = run_study(load("gl_convergence.json"));
    const double secs = clock.seconds();
    if (!report.fit) {
        o.check(false, "no fit");
        return o;
    }
    const double r = report.fit->slope;
    o.check(r >= kGlRateLo && r <= kGlRateHi, "rate " + fmt("%.3f", r));
    o.check(true, "R^2 " + fmt("%.4f", report.fit->r_squared));
    o.check(secs <= kGlSeconds, fmt("%.1fs", secs));
    return o;
}

Outcome criterion_gl_divergence() {
    Outcome o;
    const ConvergenceReport classical = run_study(load("gl_divergence_classical.json"));
    o.check(flagged(classical) >= 1,
            "classical flagged " + std::to_string(flagged(classical)) + "/" +
                std::to_string(classical.records.size()));
    const ConvergenceReport modified = run_study(load("gl_divergence_modified.json"));
    o.check(flagged(modified) == 0, "modified flagged " + std::to_string(flagged(modified)) + "/" +
                                        std::to_string(modified.records.size()));
    if (modified.fit) {
        const double r = modified.fit->slope;
        o.check(r >= kGlModifiedRateLo && r <= kGlModifiedRateHi, "modified rate " + fmt("%.3f", r));
    } else {
        o.check(false, "modified rate unavailable");
    }
    return o;
}

Outcome criterion_ait_sahalia() {
    Outcome o;
    const ConvergenceReport report = run_study(load("ait_sahalia_convergence.json"));
    if (!report.fit) {
        o.check(false, "no fit");
        return o;
    }
    o.check(report.fit->slope >= kAitSahaliaRateFloor, "rate " + fmt("%.3f", report.fit->slope));
    o.check(true, "R^2 " + fmt("%.4f", report.fit->r_squared));
    return o;
}

Outcome criterion_zcb() {
    Outcome o;
    const Stopwatch clock;
    const ExperimentConfig cfg = load("zcb_replications.json");
    const auto factors = build_factors(cfg);
    const MlmcConfig mc = make_mlmc_config(cfg);
    const auto& p = cfg.model.params;
    const double exact =
        cir_zcb_closed_form(p.at("kappa"), p.at("theta"), p.at("xi"), p.at("x0"), mc.T);
    for (double eps : cfg.mlmc->epsilons) {
        const ReplicationSummary s =
            mlmc_replications(factors, mc, eps, cfg.seed, cfg.mlmc->replications, exact);
        o.check(s.empirical_rmse <= eps, "eps " + fmt("%g", eps) + " rmse " +
                                             fmt("%.2e", s.empirical_rmse));
    }
    const ExperimentConfig savings_cfg = load("zcb_mlmc.json");
    const MlmcReport report = mlmc_estimate(build_factors(savings_cfg), make_mlmc_config(savings_cfg),
                                            5e-5, BrownianFabric(savings_cfg.seed));
    o.check(report.savings >= kZcbSavingsFloor, "savings@5e-5 " + fmt("%.2f", report.savings));
    const double secs = clock.seconds();
    o.check(secs <= kZcbSeconds, fmt("%.1fs", secs));
    return o;
}

// MLMC price at eps = 1e-5 against a published value, plus savings at 5e-5.
void spread_checks(Outcome& o, const ExperimentConfig& cfg, double published,
                   double published_half_width, MlmcReport* fine_out = nullptr) {
    const auto factors = build_factors(cfg);
    const MlmcConfig mc = make_mlmc_config(cfg);
    const MlmcReport fine = mlmc_estimate(factors, mc, 1e-5, BrownianFabric(cfg.seed));
    const double se = std::sqrt(fine.variance + std::pow(published_half_width / kZ95, 2));
    const double gap = std::abs(fine.estimate - published);
    o.check(gap <= kSpreadStdErrors * se, "mlmc@1e-5 " + fmt("%.7f", fine.estimate) + " vs " +
                                              fmt("%.7g", published) + " (" +
                                              fmt("%.2f", gap / se) + " SE)");
    const MlmcReport coarse = mlmc_estimate(factors, mc, 5e-5, BrownianFabric(cfg.seed));
    o.check(coarse.savings >= kSpreadSavingsFloor, "savings@5e-5 " + fmt("%.2f", coarse.savings));
    if (fine_out) *fine_out = fine;
}

Outcome criterion_spread_uncorrelated() {
    Outcome o;
    spread_checks(o, load("spread_ex51_mlmc.json"), kSpreadUncorrelated,
                  kSpreadUncorrelatedHalfWidth);
    return o;
}

Outcome criterion_spread_correlated() {
    Outcome o;
    MlmcReport fine;
    spread_checks(o, load("spread_ex52_mlmc.json"), kSpreadCorrelated, kSpreadCorrelatedHalfWidth,
                  &fine);
    // Regenerated reference with the drift-implicit scheme.
    const ExperimentConfig ref_cfg = load("spread_ex52_reference.json");
    const PriceBlock& pb = *ref_cfg.price;
    const McPrice ref = standard_mc_price(build_factors(ref_cfg), {parse_payoff(pb.payoff), pb.strike},
                                          ref_cfg.correlation, pb.T, pb.steps, pb.paths,
                                          PathScheme::Implicit, BrownianFabric(ref_cfg.seed),
                                          ref_cfg.threads);
    const double se_pub = std::sqrt(std::pow(ref.std_error, 2) +
                                    std::pow(kSpreadCorrelatedHalfWidth / kZ95, 2));
    const double gap_pub = std::abs(ref.price - kSpreadCorrelated);
    o.check(gap_pub <= kSpreadStdErrors * se_pub,
            "implicit reference " + fmt("%.7f", ref.price) + " +/- " + fmt("%.1e", ref.half_width) +
                " (" + fmt("%.2f", gap_pub / se_pub) + " SE from published)");
    const double se_mlmc = std::sqrt(fine.variance + std::pow(ref.std_error, 2));
    const double gap_mlmc = std::abs(fine.estimate - ref.price);
    o.check(gap_mlmc <= kSpreadStdErrors * se_mlmc,
            "mlmc vs regenerated " + fmt("%.2f", gap_mlmc / se_mlmc) + " SE");
    return o;
}

Outcome criterion_properties() {
    using namespace projem::testing;
    Outcome o;
    const Stopwatch clock;
    auto record = [&](const char* name, const PropertyResult& r) {
        o.check(r.passed, std::string(name) + " " + std::to_string(r.cases) +
                              (r.passed ? "" : " (" + r.failure + ")"));
    };
    record("projection", check_projection(101, 10000));
    record("drift-bounds", check_drift_constants(202, 20, 1000));
    record("planner", check_planner_exponents(303, 2000));
    record("implicit-residual", check_implicit_residual(404, 10000));
    record("lamperti", check_lamperti(505, 20));
    record("identities", check_linear_identities(606, 2000));
    record("determinism", check_command_determinism(std::filesystem::temp_directory_path() /
                                                    "projem_determinism_acceptance"));
    const double secs = clock.seconds();
    o.check(secs <= kPropertySeconds, fmt("%.1fs", secs));
    return o;
}

Outcome criterion_rate_tables() {
    Outcome o;
    auto cir = [](double omega) {
        return guaranteed_rate(cir_model(omega / 8.0, 1.0, 0.5, 1.0).transformed).y_rate;
    };
    const RateValue half{0.5, std::nullopt};
    const RateValue one{1.0, std::nullopt};
    const double below3 = 3.0 - 1e-6;
    o.check(cir(below3) == RateValue{std::nullopt, OpenInterval{1.0 / 6.0, 0.5 - 1.0 / (below3 + 1.0)}},
            "cir 3-1e-6 interval");
    o.check(cir(3.0 + 1e-6) == half, "cir 3+1e-6 -> 1/2");
    o.check(cir(5.0 - 1e-6) == half, "cir 5-1e-6 -> 1/2");
    o.check(cir(5.0 + 1e-6) == one, "cir 5+1e-6 -> 1");
    bool unavailable = false;
    try {
        cir(2.0);
    } catch (const RateUnavailable&) {
        unavailable = true;
    }
    o.check(unavailable, "cir omega=2 unavailable");

    auto ait = [](double varrho, double rho) {
        return ait_sahalia_model(1, 1, 1, 1, 1, varrho, rho, 1.0).transformed;
    };
    o.check(guaranteed_rate(ait(2.0 + 1e-6, 1.5)).y_rate == one, "ait-sahalia varrho+1>2rho -> 1");
    bool gated = false;
    try {
        guaranteed_rate(ait(2.0, 1.5));
    } catch (const RateUnavailable&) {
        gated = true;
    }
    o.check(gated, "ait-sahalia varrho+1=2rho gated");

    auto smooth = [](double omega) {
        return guaranteed_rate(locally_smooth_model(SmoothFunction::constant(omega / 2.0),
                                                    SmoothFunction::constant(1.0), 1.0, 0.5, 1.0,
                                                    SmoothCase::SquareRoot)
                                   .transformed)
            .y_rate;
    };
    o.check(smooth(3.5) == RateValue{std::nullopt, OpenInterval{1.0 / 6.0, 0.5 - 1.0 / 3.5}},
            "square-root band 1 interval");
    o.check(smooth(4.0 + 1e-6) == half && smooth(6.0 - 1e-6) == half, "band 2 -> 1/2");
    o.check(smooth(6.0 + 1e-6) == one, "band 3 -> 1");
    o.check(guaranteed_rate(locally_smooth_model(SmoothFunction::constant(1.0),
                                                 SmoothFunction::constant(1.0), 1.0, 0.75, 1.0,
                                                 SmoothCase::InteriorPower)
                                .transformed)
                    .y_rate == one,
            "interior power -> 1");
    return o;
}

const std::map<int, std::pair<const char*, std::function<Outcome()>>>& criteria() {
    static const std::map<int, std::pair<const char*, std::function<Outcome()>>> table{
        {1, {"CIR convergence rate", criterion_cir}},
        {2, {"Ginzburg-Landau exact-reference rate", criterion_gl_rate}},
        {3, {"Ginzburg-Landau divergence contrast", criterion_gl_divergence}},
        {4, {"Ait-Sahalia rate", criterion_ait_sahalia}},
        {5, {"ZCB MLMC", criterion_zcb}},
        {6, {"Spread option, uncorrelated", criterion_spread_uncorrelated}},
        {7, {"Spread option, correlated", criterion_spread_correlated}},
        {8, {"Property suites", criterion_properties}},
        {9, {"Rate tables", criterion_rate_tables}},
    };
    return table;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) {
            selected.insert(std::atoi(argv[++i]));
        } else {
            std::cerr << "usage: projem_acceptance [--criterion N]...\n";
            return 2;
        }
    }
    if (selected.empty()) {
        for (const auto& [id, entry] : criteria()) selected.insert(id);
    }
    bool all = true;
    for (int id : selected) {
        const auto it = criteria().find(id);
        if (it == criteria().end()) {
            std::cerr << "unknown criterion " << id << "\n";
            return 2;
        }
        Outcome outcome;
        try {
            outcome = it->second.second();
        } catch (const std::exception& e) {
            outcome.check(false, std::string("error: ") + e.what());
        }
        std::cout << "criterion " << id << " " << (outcome.passed ? "PASS" : "FAIL") << " ["
                  << it->second.first << "] " << outcome.detail << std::endl;
        all = all && outcome.passed;
    }
    return all ? 0 : 1;
}
