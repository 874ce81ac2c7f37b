#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>

namespace projem {

using ScalarFn = std::function<double(double)>;
using ParamMap = std::map<std::string, double>;

/// Open interval (lo, hi) of the real line.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double x) const { return x > lo && x < hi; }
};

/// dX = mu(X) dt + sigma(X) dW on an open domain.
struct RawModel {
    ScalarFn drift;
    ScalarFn diffusion;
    Interval domain;
    double x0 = 1.0;
};

/// Change of variables y = F(x) and its inverse.
struct LampertiMap {
    ScalarFn forward;
    ScalarFn inverse;
};

/// A real function with its first two derivatives, supplied by the caller.
struct SmoothFunction {
    ScalarFn value;
    ScalarFn d1;
    ScalarFn d2;

    static SmoothFunction constant(double c);
};

// Transformed drift families. Each exposes value/d1/d2 as pure functions.

/// f(x) = a/x + b x (Lamperti-transformed CIR and 3/2 processes).
struct ReciprocalLinearDrift {
    double a = 0.0;
    double b = 0.0;

    double operator()(double x) const { return a / x + b * x; }
    double d1(double x) const { return -a / (x * x) + b; }
    double d2(double x) const { return 2.0 * a / (x * x * x); }
};

/// Transformed Ait-Sahalia drift in y = x^(1-rho).
struct AitSahaliaDrift {
    double a_inv = 0.0;  // coefficient of 1/X in the raw drift
    double a0 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    double gamma = 1.0;
    double varrho = 2.0;  // power of the nonlinear mean reversion
    double rho = 1.5;     // diffusion power

    double operator()(double x) const;
    double d1(double x) const;
    double d2(double x) const;
};

/// f(x) = -x^3 + c x (Ginzburg-Landau, untransformed).
struct CubicDrift {
    double c = 0.0;

    double operator()(double x) const { return -x * x * x + c * x; }
    double d1(double x) const { return -3.0 * x * x + c; }
    double d2(double x) const { return -6.0 * x; }
};

/// Transformed drift of dX = (mu1(X) - mu2(X) X) dt + gamma X^nu dW, nu in [1/2, 1).
struct LocallySmoothDrift {
    SmoothFunction mu1;
    SmoothFunction mu2;
    double gamma = 1.0;
    double nu = 0.5;

    double operator()(double y) const;
    double d1(double y) const;
    double d2(double y) const;
    double inverse_map(double y) const;
};

using Drift = std::variant<ReciprocalLinearDrift, AitSahaliaDrift, CubicDrift, LocallySmoothDrift>;

/// gamma(x) = scale (constant) or scale * x (linear).
struct Diffusion {
    double scale = 1.0;
    bool linear = false;

    double operator()(double x) const { return linear ? scale * x : scale; }
    double lipschitz_constant() const { return linear ? std::abs(scale) : 0.0; }
};

enum class Regularity {
    MomentsOnly,                   // finite moments of the orders the planner needs
    SmoothDrift,                   // additionally C^2 drift with the Ito-regularity bound
    SmoothDriftConstantDiffusion,  // as above with constant diffusion
};

enum class ModelFamily { Cir, ThreeHalves, AitSahalia, GinzburgLandau, LocallySmooth };

enum class SmoothCase {
    InteriorPower,     // nu in (1/2, 1), mu1(0) > 0
    SquareRoot,        // nu = 1/2 with 2 mu1 / gamma^2 >= 1 near zero
    SquareRootBounded  // square root plus mu1 >= a*, mu2 <= b* on the whole domain
};

/// Family data the rate tables consume.
struct RateMetadata {
    ModelFamily family = ModelFamily::Cir;
    std::optional<double> omega;           // Feller-type ratio where defined
    std::optional<SmoothCase> smooth_case; // locally smooth family only
    bool gate = true;                      // Ait-Sahalia: varrho + 1 > 2 rho
};

/// Supremum of the finite moment orders; absent means every order is finite.
struct MomentInfo {
    std::optional<double> inverse_sup;   // E|Y|^{-q} < inf for q < inverse_sup
    std::optional<double> positive_sup;  // E|Y|^{q'} < inf for q' < positive_sup
};

struct TransformedModel {
    Drift drift;
    Diffusion diffusion;
    double one_sided_constant = 0.0;  // (x-y)(f(x)-f(y)) <= K |x-y|^2
    double lipschitz_constant = 1.0;  // constant of the local Lipschitz bound
    double alpha = 0.0;               // growth exponent at infinity
    double beta = 0.0;                // growth exponent at zero
    MomentInfo moments;
    Regularity regularity = Regularity::MomentsOnly;
    RateMetadata rate;
    double y0 = 1.0;

    double f(double x) const;
    double df(double x) const;
    double d2f(double x) const;
    double gamma(double x) const { return diffusion(x); }
    bool constant_diffusion() const { return !diffusion.linear; }

    /// Calls fn(concrete drift) once so hot loops avoid per-step dispatch.
    template <class Fn>
    decltype(auto) visit_drift(Fn&& fn) const {
        return std::visit(std::forward<Fn>(fn), drift);
    }
};

struct ModelBundle {
    std::string family;
    ParamMap params;
    RawModel raw;
    TransformedModel transformed;
    LampertiMap map;
};

// Family constructors.

ModelBundle cir_model(double kappa, double theta, double xi, double x0);

ModelBundle locally_smooth_model(SmoothFunction mu1, SmoothFunction mu2, double gamma, double nu,
                                 double x0, SmoothCase smooth_case);

ModelBundle three_halves_model(double c1, double c2, double c3, double x0);

ModelBundle ait_sahalia_model(double a_inv, double a0, double a1, double a2, double gamma,
                              double varrho, double rho, double x0);

/// Identity-transform model; the diffusion sigma x is already Lipschitz.
ModelBundle ginzburg_landau_model(double lambda, double sigma, double x0);

/// Builds a family from its config name and parameter map.
ModelBundle make_model(const std::string& family, const ParamMap& params);

/// CIR coefficients of the transformed equation dY = (a/Y + bY) dt + c dW.
struct CirCoefficients {
    double a;
    double b;
    double c;
};

CirCoefficients cir_coefficients(double kappa, double theta, double xi);

// Rate tables.

enum class RateSource {
    MomentBound,          // interval bound from moments only
    SmoothDrift,          // rate 1/2 from drift regularity
    FirstOrder,           // first order with constant diffusion
    ComparisonBound,      // square-root case bounded below by a Feller diffusion
};

struct OpenInterval {
    double lo;
    double hi;

    bool operator==(const OpenInterval&) const = default;
};

/// Guaranteed rate: either an exact value or an open interval of achievable rates.
struct RateValue {
    std::optional<double> exact;
    std::optional<OpenInterval> range;

    bool operator==(const RateValue&) const = default;
};

struct RateTable {
    RateValue y_rate;                 // L2 rate of the transformed scheme
    std::optional<RateValue> x_rate;  // L1 rate of the original process, when proved
    RateSource source;
};

RateTable guaranteed_rate(const TransformedModel& model);

// Sampled checks of the declared constants.

struct BoundCheck {
    double worst_one_sided = 0.0;  // max over pairs of (x-y)(f(x)-f(y)) - K|x-y|^2
    double worst_local = 0.0;      // max over pairs of |f(x)-f(y)| / bound, should be <= 1
    std::size_t pairs = 0;
};

/// Checks the one-sided and local Lipschitz bounds over pairs from a log grid in [lo, hi].
BoundCheck check_drift_bounds(const TransformedModel& model, std::size_t grid_points,
                              double lo = 1e-3, double hi = 1e3);

/// Largest relative roundtrip error |F^-1(F(x)) - x| / |x| over a log grid.
double lamperti_roundtrip_error(const LampertiMap& map, std::size_t grid_points, double lo,
                                double hi);

std::string to_string(ModelFamily family);
std::string to_string(Regularity regularity);
std::string to_string(RateSource source);

}  // namespace projem
