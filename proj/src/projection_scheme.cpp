#include "projem/projection_scheme.hpp"

#include <sstream>

namespace projem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int rank(Regularity r) { return static_cast<int>(r); }

std::string describe(double value) {
    std::ostringstream out;
    out << value;
    return out.str();
}

// Picks a moment order inside (lower, sup); absent sup means every order is finite.
double choose_order(double lower, std::optional<double> sup, double unlimited_default,
                    const char* name) {
    if (!sup) return std::max(unlimited_default, lower + 1.0);
    if (!(*sup > lower)) {
        throw PlanInfeasible(std::string("no admissible ") + name + ": need " + name + " in (" +
                             describe(lower) + ", " + describe(*sup) + ")");
    }
    return 0.5 * (lower + *sup);
}

}  // namespace

std::optional<double> ProjectionPlan::eta(double h) const {
    if (!rate || !q) return std::nullopt;
    return std::pow(h, 2.0 * *rate / *q);
}

std::optional<double> ProjectionPlan::zeta(double h) const {
    if (!rate || !q_prime) return std::nullopt;
    return std::pow(h, -2.0 * *rate / (*q_prime - 2.0));
}

SchemeGrid::SchemeGrid(double horizon, std::size_t steps) : T(horizon), n(steps) {
    if (!(horizon > 0.0)) throw DomainError("time horizon must be positive");
    if (steps < 1) throw DomainError("step count must be at least 1");
}

ProjectionBox projection_box(std::size_t n, const ProjectionPlan& plan) {
    ProjectionBox box;
    const double nn = double(n);
    if (plan.k_prime) box.hi = plan.scale_hi * std::pow(nn, *plan.k_prime);
    if (plan.symmetric) {
        if (plan.k_prime) box.lo = -box.hi;
    } else if (plan.k) {
        box.lo = plan.scale_lo * std::pow(nn, -*plan.k);
    }
    if (box.lo > box.hi) {
        throw PlanInfeasible("projection box is empty at n = " + std::to_string(n));
    }
    return box;
}

double project(double x, std::size_t n, const ProjectionPlan& plan) {
    return projection_box(n, plan)(x);
}

ScalarFn projected_drift(const TransformedModel& model, std::size_t n, const ProjectionPlan& plan) {
    const ProjectionBox box = projection_box(n, plan);
    return [&model, box](double x) { return model.f(box(x)); };
}

double projected_diffusion(const TransformedModel& model, double x, const ProjectionPlan& plan) {
    return model.gamma(plan.symmetric ? x : std::max(x, 0.0));
}

double lipschitz_bound(const TransformedModel& model, std::size_t n, const ProjectionPlan& plan) {
    const double nn = double(n);
    double sum = 1.0;
    if (model.beta > 0.0 && plan.k) sum += std::pow(nn, *plan.k * model.beta);
    if (model.alpha > 0.0 && plan.k_prime) sum += std::pow(nn, *plan.k_prime * model.alpha);
    return 2.0 * model.lipschitz_constant * sum;
}

void check_exponent_condition(const TransformedModel& model, const ProjectionPlan& plan) {
    constexpr double slack = 1e-12;
    if (model.beta > 0.0) {
        if (!plan.k) throw PlanInfeasible("model has beta > 0 but the plan has no lower exponent");
        if (!(*plan.k > 0.0) || 2.0 * model.beta * *plan.k > 1.0 + slack) {
            throw PlanInfeasible("exponent condition 2 beta k <= 1 violated (beta = " +
                                 describe(model.beta) + ", k = " + describe(*plan.k) + ")");
        }
    }
    if (model.alpha > 0.0) {
        if (!plan.k_prime) {
            throw PlanInfeasible("model has alpha > 0 but the plan has no upper exponent");
        }
        if (!(*plan.k_prime > 0.0) || 2.0 * model.alpha * *plan.k_prime > 1.0 + slack) {
            throw PlanInfeasible("exponent condition 2 alpha k' <= 1 violated (alpha = " +
                                 describe(model.alpha) + ", k' = " + describe(*plan.k_prime) + ")");
        }
    }
}

ProjectionPlan plan_exponents(const TransformedModel& model, Regularity regime,
                              std::optional<double> q_override,
                              std::optional<double> q_prime_override) {
    if (rank(regime) > rank(model.regularity)) {
        throw PlanInfeasible("regime '" + to_string(regime) + "' exceeds the model's regularity '" +
                             to_string(model.regularity) + "'");
    }
    if (regime == Regularity::SmoothDriftConstantDiffusion && !model.constant_diffusion()) {
        throw PlanInfeasible("first-order regime needs a constant diffusion");
    }
    const double alpha = model.alpha;
    const double beta = model.beta;
    const bool lower = beta > 0.0;
    const bool upper = alpha > 0.0;

    // Thresholds on (q, q') that make each regime deliver its best rate.
    double q_floor = 2.0 * beta;
    double qp_floor = 2.0 * (alpha + 1.0);
    if (regime == Regularity::SmoothDrift) {
        q_floor = std::max(q_floor, 4.0 * beta - 2.0);
        qp_floor = std::max(qp_floor, 4.0 * alpha + 2.0);
    } else if (regime == Regularity::SmoothDriftConstantDiffusion) {
        q_floor = std::max(q_floor, 6.0 * beta - 2.0);
        qp_floor = std::max(qp_floor, 6.0 * alpha + 2.0);
    }

    ProjectionPlan plan;
    plan.regime = regime;
    if (lower) {
        plan.q = q_override ? *q_override
                            : choose_order(q_floor, model.moments.inverse_sup, 6.0 * beta - 1.0, "q");
        if (!(*plan.q > 2.0 * beta)) throw PlanInfeasible("q must exceed 2 beta");
        if (model.moments.inverse_sup && !(*plan.q < *model.moments.inverse_sup)) {
            throw PlanInfeasible("q = " + describe(*plan.q) + " exceeds the finite inverse moments");
        }
    }
    if (upper) {
        plan.q_prime = q_prime_override ? *q_prime_override
                                        : choose_order(qp_floor, model.moments.positive_sup,
                                                       6.0 * alpha + 3.0, "q'");
        if (!(*plan.q_prime > 2.0 * (alpha + 1.0))) {
            throw PlanInfeasible("q' must exceed 2 (alpha + 1)");
        }
        if (model.moments.positive_sup && !(*plan.q_prime < *model.moments.positive_sup)) {
            throw PlanInfeasible("q' = " + describe(*plan.q_prime) + " exceeds the finite moments");
        }
    }

    double r = 0.5;
    switch (regime) {
        case Regularity::MomentsOnly:
            if (lower) {
                plan.k = 1.0 / (*plan.q + 2.0);
                r = std::min(r, 0.5 - beta / (*plan.q + 2.0));
            }
            if (upper) {
                plan.k_prime = 1.0 / (*plan.q_prime - 2.0);
                r = std::min(r, 0.5 - alpha / (*plan.q_prime - 2.0));
            }
            break;
        case Regularity::SmoothDrift:
            if (lower) {
                plan.k = 1.0 / (2.0 * beta);
                r = std::min(r, (*plan.q + 2.0) / (4.0 * beta) - 0.5);
            }
            if (upper) {
                plan.k_prime = 1.0 / (2.0 * alpha);
                r = std::min(r, (*plan.q_prime - 2.0) / (4.0 * alpha) - 0.5);
            }
            break;
        case Regularity::SmoothDriftConstantDiffusion:
            if (lower) {
                if (!(*plan.q > 6.0 * beta - 2.0)) throw PlanInfeasible("first order needs q > 6 beta - 2");
                plan.k = 1.0 / (2.0 * beta);
            }
            if (upper) {
                if (!(*plan.q_prime > 6.0 * alpha + 2.0)) {
                    throw PlanInfeasible("first order needs q' > 6 alpha + 2");
                }
                plan.k_prime = 1.0 / (2.0 * alpha);
            }
            r = 1.0;
            break;
    }
    if (!(r > 0.0)) throw PlanInfeasible("planned rate " + describe(r) + " is not positive");
    plan.rate = r;
    check_exponent_condition(model, plan);
    return plan;
}

ProjectionPlan plan_best(const TransformedModel& model) {
    std::optional<ProjectionPlan> best;
    std::string last_error = "no regime applies";
    for (Regularity regime : {Regularity::MomentsOnly, Regularity::SmoothDrift,
                              Regularity::SmoothDriftConstantDiffusion}) {
        if (rank(regime) > rank(model.regularity)) break;
        try {
            ProjectionPlan plan = plan_exponents(model, regime);
            if (!best || *plan.rate >= *best->rate) best = plan;
        } catch (const PlanInfeasible& e) {
            last_error = e.what();
        }
    }
    if (!best) throw PlanInfeasible(last_error);
    return *best;
}

ProjectionPlan manual_plan(const TransformedModel& model, std::optional<double> k,
                           std::optional<double> k_prime, double scale_lo, double scale_hi) {
    if (!(scale_lo > 0.0) || !(scale_hi > 0.0)) {
        throw PlanInfeasible("projection scale factors must be positive");
    }
    ProjectionPlan plan;
    plan.k = model.beta > 0.0 ? k : std::nullopt;
    plan.k_prime = model.alpha > 0.0 ? k_prime : std::nullopt;
    plan.scale_lo = scale_lo;
    plan.scale_hi = scale_hi;
    plan.regime = model.regularity;
    check_exponent_condition(model, plan);
    return plan;
}

SchemeVariant parse_variant(const std::string& name) {
    if (name == "modified") return SchemeVariant::Modified;
    if (name == "classical") return SchemeVariant::Classical;
    throw ConfigError("unknown scheme variant '" + name + "'");
}

Readout parse_readout(const std::string& name) {
    if (name == "raw") return Readout::Raw;
    if (name == "bar") return Readout::Bar;
    if (name == "tilde") return Readout::Tilde;
    if (name == "check") return Readout::Check;
    if (name == "double") return Readout::Double;
    throw ConfigError("unknown read-out variant '" + name + "'");
}

std::string to_string(SchemeVariant variant) {
    return variant == SchemeVariant::Modified ? "modified" : "classical";
}

std::string to_string(Readout readout) {
    switch (readout) {
        case Readout::Raw: return "raw";
        case Readout::Bar: return "bar";
        case Readout::Tilde: return "tilde";
        case Readout::Check: return "check";
        case Readout::Double: return "double";
    }
    return "raw";
}

double step(double y, const TransformedModel& model, std::size_t n, const ProjectionPlan& plan,
            double h, double dW) {
    if (!(h > 0.0)) throw DomainError("step size must be positive");
    const double next =
        y + model.f(project(y, n, plan)) * h + projected_diffusion(model, y, plan) * dW;
    if (!std::isfinite(next)) throw NonFinite(0, next);
    return next;
}

double classical_step(double y, const TransformedModel& model, double h, double dW) {
    const double next = y + model.f(y) * h + model.gamma(y) * dW;
    if (!std::isfinite(next)) throw NonFinite(0, next);
    return next;
}

std::vector<double> simulate_path(const TransformedModel& model, const SchemeGrid& grid,
                                  const ProjectionPlan& plan, std::span<const double> increments) {
    if (increments.size() != grid.n) {
        throw LengthMismatch("expected " + std::to_string(grid.n) + " increments, got " +
                             std::to_string(increments.size()));
    }
    std::vector<double> path(grid.n + 1);
    path[0] = model.y0;
    const double h = grid.h();
    for (std::size_t i = 0; i < grid.n; ++i) {
        try {
            path[i + 1] = step(path[i], model, grid.n, plan, h, increments[i]);
        } catch (const NonFinite& e) {
            throw NonFinite(i + 1, path[i]);
        }
    }
    return path;
}

std::vector<double> simulate_classical_path(const TransformedModel& model, const SchemeGrid& grid,
                                            std::span<const double> increments) {
    if (increments.size() != grid.n) {
        throw LengthMismatch("expected " + std::to_string(grid.n) + " increments, got " +
                             std::to_string(increments.size()));
    }
    std::vector<double> path(grid.n + 1);
    path[0] = model.y0;
    const double h = grid.h();
    for (std::size_t i = 0; i < grid.n; ++i) {
        path[i + 1] = classical_step(path[i], model, h, increments[i]);
        if (!std::isfinite(path[i + 1])) throw NonFinite(i + 1, path[i + 1]);
    }
    return path;
}

double clamp_variant(double yhat, Readout variant, const ProjectionPlan& plan, double h) {
    auto need = [](std::optional<double> value, const char* name) {
        if (!value) throw MissingThreshold(std::string("plan has no ") + name + " threshold");
        return *value;
    };
    switch (variant) {
        case Readout::Raw: return yhat;
        case Readout::Bar: return std::max(yhat, 0.0);
        case Readout::Tilde: return std::max(yhat, need(plan.eta(h), "eta"));
        case Readout::Check: return std::min(yhat, need(plan.zeta(h), "zeta"));
        case Readout::Double: {
            const double lo = need(plan.eta(h), "eta");
            const double hi = need(plan.zeta(h), "zeta");
            return std::min(std::max(yhat, lo), hi);
        }
    }
    return yhat;
}

Stepper::Stepper(const TransformedModel& model, const ProjectionPlan& plan, SchemeVariant variant,
                 std::size_t n, double h)
    : model_(&model),
      box_(variant == SchemeVariant::Modified ? projection_box(n, plan) : ProjectionBox{}),
      clamp_noise_(variant == SchemeVariant::Modified && !plan.symmetric),
      linear_(model.diffusion.linear),
      scale_(model.diffusion.scale),
      h_(h) {}

double Stepper::terminal(double y0, std::span<const double> increments) const {
    return walk(y0, increments, [](std::size_t, double) {});
}

}  // namespace projem
