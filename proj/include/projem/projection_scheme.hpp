#pragma once

#include "projem/errors.hpp"
#include "projem/sde_models.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace projem {

/// Exponents and scales of the drift projection, plus the rate they certify.
struct ProjectionPlan {
    std::optional<double> k;        // lower clamp exponent; absent when beta = 0
    std::optional<double> k_prime;  // upper clamp exponent; absent when alpha = 0
    double scale_lo = 1.0;
    double scale_hi = 1.0;
    std::optional<double> rate;     // certified L2 rate; absent for hand-set exponents
    std::optional<double> q;        // inverse-moment order behind the rate
    std::optional<double> q_prime;  // moment order behind the rate
    Regularity regime = Regularity::MomentsOnly;
    bool symmetric = false;         // clamp to [-U n^k', U n^k'] for models on the whole line

    /// eta = h^(2r/q), the lower read-out threshold.
    std::optional<double> eta(double h) const;
    /// zeta = h^(-2r/(q'-2)), the upper read-out threshold.
    std::optional<double> zeta(double h) const;
};

/// Equidistant grid t_i = i T / n.
struct SchemeGrid {
    double T = 1.0;
    std::size_t n = 1;

    SchemeGrid(double horizon, std::size_t steps);
    double h() const { return T / double(n); }
    double time(std::size_t i) const { return T * double(i) / double(n); }
};

/// Clamp box for a given step count. Missing bounds are infinite.
struct ProjectionBox {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    double operator()(double x) const { return std::min(std::max(x, lo), hi); }
};

ProjectionBox projection_box(std::size_t n, const ProjectionPlan& plan);

double project(double x, std::size_t n, const ProjectionPlan& plan);

/// f composed with the projection for step count n.
ScalarFn projected_drift(const TransformedModel& model, std::size_t n, const ProjectionPlan& plan);

/// Diffusion evaluated at max(x, 0); on the whole line (symmetric plans) no clamp is applied.
double projected_diffusion(const TransformedModel& model, double x, const ProjectionPlan& plan);

/// L(n) = 2 K (1 + n^{k beta} [beta > 0] + n^{k' alpha} [alpha > 0]).
double lipschitz_bound(const TransformedModel& model, std::size_t n, const ProjectionPlan& plan);

/// Derives (k, k') and the guaranteed rate for a regularity regime.
/// q and q' default to the model's admissible interval (see implementation).
ProjectionPlan plan_exponents(const TransformedModel& model, Regularity regime,
                              std::optional<double> q = std::nullopt,
                              std::optional<double> q_prime = std::nullopt);

/// Best feasible regime not exceeding the model's declared regularity.
ProjectionPlan plan_best(const TransformedModel& model);

/// Hand-set exponents; no rate is certified. Checks the exponent condition.
ProjectionPlan manual_plan(const TransformedModel& model, std::optional<double> k,
                           std::optional<double> k_prime, double scale_lo = 1.0,
                           double scale_hi = 1.0);

/// Checks 2 beta k <= 1 and 2 alpha k' <= 1; throws PlanInfeasible otherwise.
void check_exponent_condition(const TransformedModel& model, const ProjectionPlan& plan);

enum class SchemeVariant { Modified, Classical };

enum class Readout { Raw, Bar, Tilde, Check, Double };

SchemeVariant parse_variant(const std::string& name);
Readout parse_readout(const std::string& name);
std::string to_string(SchemeVariant variant);
std::string to_string(Readout readout);

/// One step y + f_n(y) h + gamma_bar(y) dW. Throws NonFinite(0, value) on overflow.
double step(double y, const TransformedModel& model, std::size_t n, const ProjectionPlan& plan,
            double h, double dW);

/// Classical Euler-Maruyama step y + f(y) h + gamma(y) dW, without any projection.
double classical_step(double y, const TransformedModel& model, double h, double dW);

/// All n+1 nodes of the modified scheme. Throws NonFinite with the failing step index.
std::vector<double> simulate_path(const TransformedModel& model, const SchemeGrid& grid,
                                  const ProjectionPlan& plan, std::span<const double> increments);

/// All n+1 nodes of classical Euler-Maruyama.
std::vector<double> simulate_classical_path(const TransformedModel& model, const SchemeGrid& grid,
                                            std::span<const double> increments);

/// Read-out clamp of a raw iterate.
double clamp_variant(double yhat, Readout variant, const ProjectionPlan& plan, double h);

/// Hot-loop stepper: dispatches the drift once and walks an increment sequence.
/// Non-finite values propagate instead of throwing.
class Stepper {
public:
    Stepper(const TransformedModel& model, const ProjectionPlan& plan, SchemeVariant variant,
            std::size_t n, double h);

    /// Terminal value after consuming increments from y0.
    double terminal(double y0, std::span<const double> increments) const;

    /// Calls visit(i, y_i) for i = 0..n-1 before each step, then returns y_n.
    template <class Visit>
    double walk(double y0, std::span<const double> increments, Visit&& visit) const {
        return model_->visit_drift([&](const auto& f) {
            double y = y0;
            for (std::size_t i = 0; i < increments.size(); ++i) {
                visit(i, y);
                y = advance(f, y, increments[i]);
            }
            return y;
        });
    }

private:
    template <class F>
    double advance(const F& f, double y, double dW) const {
        const double drift_at = box_(y);
        const double noise_at = clamp_noise_ ? std::max(y, 0.0) : y;
        const double g = linear_ ? scale_ * noise_at : scale_;
        return y + f(drift_at) * h_ + g * dW;
    }

    const TransformedModel* model_;
    ProjectionBox box_;
    bool clamp_noise_;
    bool linear_;
    double scale_;
    double h_;
};

}  // namespace projem
