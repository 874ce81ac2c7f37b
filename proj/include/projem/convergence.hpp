#pragma once

#include "projem/path_engine.hpp"
#include "projem/projection_scheme.hpp"
#include "projem/sde_models.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace projem {

/// Errors above this magnitude, or non-finite, are stored as the cap and flagged.
inline constexpr double kDivergenceCap = 1048576.0;  // 2^20

/// Mean absolute pathwise difference.
double strong_error(std::span<const double> true_vals, std::span<const double> approx_vals);

struct RateFit {
    double slope = 0.0;  // positive rate: minus the regression slope
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Least squares of log2(error) on log2(steps).
RateFit fit_rate(std::span<const double> steps, std::span<const double> errors);

enum class ReferenceKind {
    ClosedForm,    // Ginzburg-Landau exact solution
    ImplicitFine,  // drift-implicit square-root scheme on the fine grid
    ModifiedFine,  // the projected scheme itself on the fine grid
};

enum class TargetSpace { Original, Transformed };

ReferenceKind parse_reference(const std::string& name);
TargetSpace parse_target(const std::string& name);
std::string to_string(ReferenceKind kind);
std::string to_string(TargetSpace target);

struct StudySpec {
    double T = 1.0;
    int n_min = 3;
    int n_max = 9;
    std::size_t paths = 10000;
    ReferenceKind reference = ReferenceKind::ImplicitFine;
    int fine_exponent = 12;
    SchemeVariant variant = SchemeVariant::Modified;
    Readout readout = Readout::Raw;
    TargetSpace target = TargetSpace::Original;
    unsigned threads = 0;
};

struct ConvergenceRecord {
    int N = 0;
    std::size_t steps = 0;
    double error = 0.0;
    std::size_t paths = 0;
    bool diverged = false;
};

struct ConvergenceReport {
    std::vector<ConvergenceRecord> records;
    std::optional<RateFit> fit;  // absent when fewer than 3 records converge
    ProjectionPlan plan;
    StudySpec spec;
    std::uint64_t seed = 0;
};

/// Fits over records that did not diverge; returns nullopt when fewer than 3 remain.
std::optional<RateFit> fit_records(const std::vector<ConvergenceRecord>& records);

/// Strong error at T for step counts 2^N, N in [n_min, n_max], against a reference on
/// 2^fine_exponent steps. Coarse increments are sums of the reference's fine increments.
ConvergenceReport run_convergence_study(const ModelBundle& model, const ProjectionPlan& plan,
                                        const StudySpec& spec, const BrownianFabric& fabric);

}  // namespace projem
