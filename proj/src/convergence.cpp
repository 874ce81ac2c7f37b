#include "projem/convergence.hpp"

#include "projem/errors.hpp"
#include "projem/parallel.hpp"
#include "projem/reference_solvers.hpp"

#include <cmath>
#include <algorithm>
#include <functional>
#include <memory>

namespace projem {

double strong_error(std::span<const double> true_vals, std::span<const double> approx_vals) {
    if (true_vals.size() != approx_vals.size() || true_vals.empty()) {
        throw LengthMismatch("strong error needs two non-empty sequences of equal length");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < true_vals.size(); ++i) sum += std::abs(true_vals[i] - approx_vals[i]);
    return sum / double(true_vals.size());
}

RateFit fit_rate(std::span<const double> steps, std::span<const double> errors) {
    if (steps.size() != errors.size()) throw LengthMismatch("steps and errors differ in length");
    if (steps.size() < 3) throw DomainError("rate fit needs at least 3 records");
    const double n = double(steps.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (!(steps[i] > 0.0) || !(errors[i] > 0.0)) {
            throw DomainError("rate fit needs positive steps and errors");
        }
        mx += std::log2(steps[i]);
        my += std::log2(errors[i]);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const double dx = std::log2(steps[i]) - mx;
        const double dy = std::log2(errors[i]) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw DomainError("rate fit needs distinct step counts");
    const double b = sxy / sxx;
    RateFit fit;
    fit.slope = -b;
    fit.intercept = my - b * mx;
    const double ss_res = std::max(0.0, syy - b * sxy);
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return fit;
}

ReferenceKind parse_reference(const std::string& name) {
    if (name == "closed-form") return ReferenceKind::ClosedForm;
    if (name == "implicit") return ReferenceKind::ImplicitFine;
    if (name == "modified") return ReferenceKind::ModifiedFine;
    throw ConfigError("unknown reference kind '" + name + "'");
}

TargetSpace parse_target(const std::string& name) {
    if (name == "x") return TargetSpace::Original;
    if (name == "y") return TargetSpace::Transformed;
    throw ConfigError("unknown target space '" + name + "'");
}

std::string to_string(ReferenceKind kind) {
    switch (kind) {
        case ReferenceKind::ClosedForm: return "closed-form";
        case ReferenceKind::ImplicitFine: return "implicit";
        case ReferenceKind::ModifiedFine: return "modified";
    }
    return "implicit";
}

std::string to_string(TargetSpace target) {
    return target == TargetSpace::Original ? "x" : "y";
}

std::optional<RateFit> fit_records(const std::vector<ConvergenceRecord>& records) {
    std::vector<double> steps, errors;
    for (const auto& r : records) {
        if (r.diverged) continue;
        steps.push_back(double(r.steps));
        errors.push_back(r.error);
    }
    if (steps.size() < 3) return std::nullopt;
    return fit_rate(steps, errors);
}

namespace {

double param(const ModelBundle& model, const char* key) {
    auto it = model.params.find(key);
    if (it == model.params.end()) {
        throw ConfigError(std::string("model is missing parameter '") + key + "'");
    }
    return it->second;
}

// Reference terminal value in the transformed coordinate from the fine increments.
std::function<double(std::span<const double>)> make_reference(const ModelBundle& model,
                                                              const ProjectionPlan& plan,
                                                              const StudySpec& spec) {
    const std::size_t fine_steps = std::size_t(1) << spec.fine_exponent;
    const double h = spec.T / double(fine_steps);
    switch (spec.reference) {
        case ReferenceKind::ClosedForm: {
            if (model.family != "ginzburg_landau") {
                throw ConfigError("closed-form reference is only available for ginzburg_landau");
            }
            const double lambda = param(model, "lambda");
            const double sigma = param(model, "sigma");
            const double x0 = param(model, "x0");
            const double T = spec.T;
            return [=](std::span<const double> dw) {
                return ginzburg_landau_exact_terminal(lambda, sigma, x0, T, dw);
            };
        }
        case ReferenceKind::ImplicitFine: {
            const ImplicitCirParams params = ImplicitCirParams::from_model(model.transformed);
            return [=](std::span<const double> dw) { return implicit_cir_terminal(params, h, dw); };
        }
        case ReferenceKind::ModifiedFine: {
            auto stepper = std::make_shared<Stepper>(model.transformed, plan,
                                                     SchemeVariant::Modified, fine_steps, h);
            const double y0 = model.transformed.y0;
            return [stepper, y0](std::span<const double> dw) { return stepper->terminal(y0, dw); };
        }
    }
    throw ConfigError("unknown reference kind");
}

}  // namespace

ConvergenceReport run_convergence_study(const ModelBundle& model, const ProjectionPlan& plan,
                                        const StudySpec& spec, const BrownianFabric& fabric) {
    if (spec.n_min < 1 || spec.n_max < spec.n_min) throw ConfigError("invalid step-count range");
    if (spec.fine_exponent <= spec.n_max || spec.fine_exponent > 24) {
        throw ConfigError("reference grid must be strictly finer than every tested grid");
    }
    if (spec.paths < 1) throw ConfigError("path count must be positive");
    if (!(spec.T > 0.0)) throw ConfigError("time horizon must be positive");

    const std::size_t fine_steps = std::size_t(1) << spec.fine_exponent;
    const double fine_h = spec.T / double(fine_steps);
    const std::size_t levels = std::size_t(spec.n_max - spec.n_min + 1);
    const auto reference = make_reference(model, plan, spec);

    std::vector<Stepper> steppers;
    std::vector<double> coarse_h;
    for (int N = spec.n_min; N <= spec.n_max; ++N) {
        const std::size_t n = std::size_t(1) << N;
        coarse_h.push_back(spec.T / double(n));
        steppers.emplace_back(model.transformed, plan, spec.variant, n, coarse_h.back());
    }
    // Closed-form reference values live in X; scheme values live in Y.
    const bool reference_in_x = spec.reference == ReferenceKind::ClosedForm;
    const bool compare_in_x = spec.target == TargetSpace::Original;

    constexpr std::size_t chunk = 64;
    const std::size_t chunks = (spec.paths + chunk - 1) / chunk;
    std::vector<std::vector<double>> partial(chunks, std::vector<double>(levels, 0.0));

    for_each_chunk(spec.paths, chunk, spec.threads,
                   [&](std::size_t c, std::size_t begin, std::size_t end) {
        std::vector<double> fine(fine_steps);
        std::vector<double> coarse(fine_steps);
        auto& sums = partial[c];
        for (std::size_t path = begin; path < end; ++path) {
            fabric.increments({path, std::uint32_t(spec.fine_exponent), 0}, fine_h, fine);
            const double ref_raw = reference(fine);
            double ref_x = reference_in_x ? ref_raw : model.map.inverse(ref_raw);
            double ref_y = reference_in_x ? model.map.forward(ref_raw) : ref_raw;
            for (std::size_t j = 0; j < levels; ++j) {
                const std::size_t n = std::size_t(1) << (spec.n_min + int(j));
                std::span<double> dw(coarse.data(), n);
                couple_levels(fine, fine_steps / n, dw);
                const double yhat = steppers[j].terminal(model.transformed.y0, dw);
                const double y = clamp_variant(yhat, spec.readout, plan, coarse_h[j]);
                sums[j] += compare_in_x ? std::abs(ref_x - model.map.inverse(y))
                                        : std::abs(ref_y - y);
            }
        }
    });

    ConvergenceReport report;
    report.plan = plan;
    report.spec = spec;
    report.seed = fabric.seed();
    for (std::size_t j = 0; j < levels; ++j) {
        double total = 0.0;
        for (const auto& p : partial) total += p[j];
        ConvergenceRecord record;
        record.N = spec.n_min + int(j);
        record.steps = std::size_t(1) << record.N;
        record.paths = spec.paths;
        record.error = total / double(spec.paths);
        if (!std::isfinite(record.error) || record.error > kDivergenceCap) {
            record.error = kDivergenceCap;
            record.diverged = true;
        }
        report.records.push_back(record);
    }
    report.fit = fit_records(report.records);
    return report;
}

}  // namespace projem
