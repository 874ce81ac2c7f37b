#include "projem/sde_models.hpp"

#include "projem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

namespace projem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << name << " must be a finite positive number, got " << value;
        throw DomainError(msg.str());
    }
}

void require_nonnegative(double value, const char* name) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << name << " must be a finite non-negative number, got " << value;
        throw DomainError(msg.str());
    }
}

std::vector<double> log_grid(std::size_t points, double lo, double hi) {
    std::vector<double> grid(points);
    const double step = points > 1 ? (std::log(hi) - std::log(lo)) / double(points - 1) : 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = std::exp(std::log(lo) + step * double(i));
    }
    return grid;
}

LampertiMap identity_map() {
    return {[](double x) { return x; }, [](double y) { return y; }};
}

}  // namespace

SmoothFunction SmoothFunction::constant(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

// --- Ait-Sahalia -----------------------------------------------------------

double AitSahaliaDrift::operator()(double x) const {
    const double s = 1.0 - rho;
    const double p_inv = (-1.0 - rho) / s;
    const double p0 = -rho / s;
    const double p2 = (varrho - rho) / s;
    return s * (a_inv * std::pow(x, p_inv) - a0 * std::pow(x, p0) + a1 * x -
                a2 * std::pow(x, p2) - 0.5 * rho * gamma * gamma / x);
}

double AitSahaliaDrift::d1(double x) const {
    const double r1 = rho - 1.0;
    return -a_inv * (1.0 + rho) * std::pow(x, 2.0 / r1) + a0 * rho * std::pow(x, 1.0 / r1) +
           a1 * (1.0 - rho) - a2 * (varrho - rho) * std::pow(x, -(varrho - 1.0) / r1) -
           0.5 * rho * gamma * gamma * r1 / (x * x);
}

double AitSahaliaDrift::d2(double x) const {
    const double r1 = rho - 1.0;
    return -2.0 * a_inv * (rho + 1.0) / r1 * std::pow(x, (3.0 - rho) / r1) +
           a0 * rho / r1 * std::pow(x, (2.0 - rho) / r1) +
           a2 * (varrho - rho) * (varrho - 1.0) / r1 * std::pow(x, -(varrho + rho - 2.0) / r1) +
           rho * gamma * gamma * r1 / (x * x * x);
}

// --- locally smooth --------------------------------------------------------

double LocallySmoothDrift::inverse_map(double y) const {
    return std::pow(gamma * (1.0 - nu) * y, 1.0 / (1.0 - nu));
}

double LocallySmoothDrift::operator()(double y) const {
    const double x = inverse_map(y);
    const double mu = mu1.value(x) - mu2.value(x) * x;
    const double sigma = gamma * std::pow(x, nu);
    const double dsigma = gamma * nu * std::pow(x, nu - 1.0);
    return mu / sigma - 0.5 * dsigma;
}

double LocallySmoothDrift::d1(double y) const {
    const double p = 1.0 / (1.0 - nu);
    const double a = std::pow(gamma * (1.0 - nu), p);
    const double x = a * std::pow(y, p);
    return mu1.d1(x) - nu / a * mu1.value(x) * std::pow(y, -p) - a * mu2.d1(x) * std::pow(y, p) -
           (1.0 - nu) * mu2.value(x) + nu / (2.0 * (1.0 - nu)) / (y * y);
}

double LocallySmoothDrift::d2(double y) const {
    const double p = 1.0 / (1.0 - nu);
    const double a = std::pow(gamma * (1.0 - nu), p);
    const double x = a * std::pow(y, p);
    const double dx = p * a * std::pow(y, p - 1.0);  // dX/dy
    const double ym = std::pow(y, -p);
    const double yp = std::pow(y, p);
    return mu1.d2(x) * dx - nu / a * (mu1.d1(x) * dx * ym - p * mu1.value(x) * ym / y) -
           a * (mu2.d2(x) * dx * yp + p * mu2.d1(x) * yp / y) - (1.0 - nu) * mu2.d1(x) * dx -
           nu / (1.0 - nu) / (y * y * y);
}

// --- TransformedModel ------------------------------------------------------

double TransformedModel::f(double x) const {
    return std::visit([x](const auto& d) { return d(x); }, drift);
}

double TransformedModel::df(double x) const {
    return std::visit([x](const auto& d) { return d.d1(x); }, drift);
}

double TransformedModel::d2f(double x) const {
    return std::visit([x](const auto& d) { return d.d2(x); }, drift);
}

// --- families --------------------------------------------------------------

CirCoefficients cir_coefficients(double kappa, double theta, double xi) {
    return {(4.0 * kappa * theta - xi * xi) / 8.0, -kappa / 2.0, xi / 2.0};
}

ModelBundle cir_model(double kappa, double theta, double xi, double x0) {
    require_positive(kappa, "kappa");
    require_positive(theta, "theta");
    require_positive(xi, "xi");
    require_positive(x0, "x0");
    const double omega = 2.0 * kappa * theta / (xi * xi);
    if (!(omega > 1.0)) {
        std::ostringstream msg;
        msg << "Feller ratio 2*kappa*theta/xi^2 = " << omega << " must exceed 1";
        throw FellerViolation(msg.str());
    }
    const auto [a, b, c] = cir_coefficients(kappa, theta, xi);

    ModelBundle m;
    m.family = "cir";
    m.params = {{"kappa", kappa}, {"theta", theta}, {"xi", xi}, {"x0", x0}};
    m.raw = {[kappa, theta](double x) { return kappa * (theta - x); },
             [xi](double x) { return xi * std::sqrt(x); }, Interval{0.0, kInf}, x0};
    m.map = {[](double x) { return std::sqrt(x); }, [](double y) { return y * y; }};

    auto& t = m.transformed;
    t.drift = ReciprocalLinearDrift{a, b};
    t.diffusion = Diffusion{c, false};
    // f' = -a/x^2 + b < 0 on (0, inf) since a >= 0 and b < 0.
    t.one_sided_constant = std::max(0.0, b);
    t.lipschitz_constant = std::max(std::abs(b), a / 2.0);
    t.alpha = 0.0;
    t.beta = 2.0;
    t.moments.inverse_sup = 2.0 * omega;
    t.regularity = Regularity::SmoothDriftConstantDiffusion;
    t.rate = {ModelFamily::Cir, omega, std::nullopt, true};
    t.y0 = std::sqrt(x0);
    return m;
}

ModelBundle three_halves_model(double c1, double c2, double c3, double x0) {
    require_positive(c1, "c1");
    require_positive(c2, "c2");
    require_positive(c3, "c3");
    require_positive(x0, "x0");
    const double omega = 2.0 + 2.0 * c1 / (c3 * c3);
    const double a = (4.0 * c1 + 3.0 * c3 * c3) / 8.0;
    const double b = -c1 * c2 / 2.0;
    const double c = -c3 / 2.0;

    ModelBundle m;
    m.family = "three_halves";
    m.params = {{"c1", c1}, {"c2", c2}, {"c3", c3}, {"x0", x0}};
    m.raw = {[c1, c2](double x) { return c1 * x * (c2 - x); },
             [c3](double x) { return c3 * std::pow(x, 1.5); }, Interval{0.0, kInf}, x0};
    m.map = {[](double x) { return 1.0 / std::sqrt(x); }, [](double y) { return 1.0 / (y * y); }};

    auto& t = m.transformed;
    t.drift = ReciprocalLinearDrift{a, b};
    t.diffusion = Diffusion{c, false};
    t.one_sided_constant = std::max(0.0, b);
    t.lipschitz_constant = std::max(std::abs(b), a / 2.0);
    t.alpha = 0.0;
    t.beta = 2.0;
    t.moments.inverse_sup = 2.0 * omega;
    t.regularity = Regularity::SmoothDriftConstantDiffusion;
    t.rate = {ModelFamily::ThreeHalves, omega, std::nullopt, true};
    t.y0 = 1.0 / std::sqrt(x0);
    return m;
}

ModelBundle ait_sahalia_model(double a_inv, double a0, double a1, double a2, double gamma,
                              double varrho, double rho, double x0) {
    require_nonnegative(a_inv, "a_inv");
    require_nonnegative(a0, "a0");
    require_nonnegative(a1, "a1");
    require_nonnegative(a2, "a2");
    require_positive(gamma, "gamma");
    require_positive(x0, "x0");
    if (!(rho > 1.0) || !(varrho > 1.0)) {
        throw DomainError("Ait-Sahalia powers rho and varrho must both exceed 1");
    }
    if (a0 > 0.0 && a_inv == 0.0) {
        throw DomainError("Ait-Sahalia drift with a0 > 0 and a_inv = 0 is not one-sided Lipschitz");
    }
    const bool gate = varrho + 1.0 > 2.0 * rho;

    ModelBundle m;
    m.family = "ait_sahalia";
    m.params = {{"a_inv", a_inv}, {"a0", a0},         {"a1", a1},   {"a2", a2},
                {"gamma", gamma}, {"varrho", varrho}, {"rho", rho}, {"x0", x0}};
    m.raw = {[=](double x) { return a_inv / x - a0 + a1 * x - a2 * std::pow(x, varrho); },
             [=](double x) { return gamma * std::pow(x, rho); }, Interval{0.0, kInf}, x0};
    m.map = {[rho](double x) { return std::pow(x, 1.0 - rho); },
             [rho](double y) { return std::pow(y, 1.0 / (1.0 - rho)); }};

    auto& t = m.transformed;
    t.drift = AitSahaliaDrift{a_inv, a0, a1, a2, gamma, varrho, rho};
    t.diffusion = Diffusion{(1.0 - rho) * gamma, false};
    // Positive parts of f': the a0 term, dominated by the a_inv term, and (for varrho < rho)
    // the a2 term, dominated near 0 by the gamma term. Each pair has a finite maximum.
    t.one_sided_constant = a0 > 0.0 ? a0 * a0 * rho * rho / (4.0 * a_inv * (1.0 + rho)) : 0.0;
    if (varrho < rho && a2 > 0.0) {
        const double b = (varrho - 1.0) / (rho - 1.0);  // in (0, 1)
        const double c = a2 * (rho - varrho);
        const double d = 0.5 * rho * gamma * gamma * (rho - 1.0);
        const double v = std::pow(b * c / (2.0 * d), 1.0 / (2.0 - b));
        t.one_sided_constant += c * std::pow(v, b) - d * v * v;
    }
    // Each term of |f'| is c z^p with p in [-beta, alpha], hence <= c (1 + z^alpha + z^-beta).
    t.lipschitz_constant = a_inv * (1.0 + rho) + a0 * rho + a1 * (rho - 1.0) +
                           a2 * std::abs(varrho - rho) + 0.5 * rho * gamma * gamma * (rho - 1.0);
    t.alpha = 2.0 / (rho - 1.0);
    // The gamma term of f' scales as z^-2; it is covered by (varrho-1)/(rho-1) whenever the gate holds.
    t.beta = std::max((varrho - 1.0) / (rho - 1.0), 2.0);
    if (gate) {
        t.moments = {};  // all moments and inverse moments finite
    } else {
        t.moments = {0.0, 0.0};  // nothing established
    }
    t.regularity = Regularity::SmoothDriftConstantDiffusion;
    t.rate = {ModelFamily::AitSahalia, std::nullopt, std::nullopt, gate};
    t.y0 = std::pow(x0, 1.0 - rho);
    return m;
}

ModelBundle ginzburg_landau_model(double lambda, double sigma, double x0) {
    require_nonnegative(lambda, "lambda");
    require_nonnegative(sigma, "sigma");
    require_positive(x0, "x0");
    const double c = lambda + 0.5 * sigma * sigma;

    ModelBundle m;
    m.family = "ginzburg_landau";
    m.params = {{"lambda", lambda}, {"sigma", sigma}, {"x0", x0}};
    m.raw = {[c](double x) { return -x * x * x + c * x; },
             [sigma](double x) { return sigma * x; }, Interval{0.0, kInf}, x0};
    m.map = identity_map();

    auto& t = m.transformed;
    t.drift = CubicDrift{c};
    t.diffusion = Diffusion{sigma, true};
    t.one_sided_constant = c;
    t.lipschitz_constant = std::max(3.0, c);
    t.alpha = 2.0;
    t.beta = 0.0;
    t.moments = {};
    t.regularity = Regularity::SmoothDrift;
    t.rate = {ModelFamily::GinzburgLandau, std::nullopt, std::nullopt, true};
    t.y0 = x0;
    return m;
}

ModelBundle locally_smooth_model(SmoothFunction mu1, SmoothFunction mu2, double gamma, double nu,
                                 double x0, SmoothCase smooth_case) {
    require_positive(gamma, "gamma");
    require_positive(x0, "x0");
    if (!(nu >= 0.5 && nu < 1.0)) {
        std::ostringstream msg;
        msg << "diffusion power nu must lie in [1/2, 1), got " << nu;
        throw DomainError(msg.str());
    }
    const bool square_root = nu == 0.5;
    if (square_root == (smooth_case == SmoothCase::InteriorPower)) {
        throw DomainError("smooth case does not match the diffusion power nu");
    }
    const double mu1_at_zero = mu1.value(0.0);
    if (!(mu1_at_zero > 0.0)) {
        throw DomainError("mu1(0) must be positive");
    }

    LocallySmoothDrift drift{mu1, mu2, gamma, nu};
    const double p = 1.0 / (1.0 - nu);

    ModelBundle m;
    m.family = "locally_smooth";
    m.params = {{"gamma", gamma}, {"nu", nu}, {"x0", x0}};
    m.raw = {[mu1, mu2](double x) { return mu1.value(x) - mu2.value(x) * x; },
             [gamma, nu](double x) { return gamma * std::pow(x, nu); }, Interval{0.0, kInf}, x0};
    m.map = {[gamma, nu](double x) { return std::pow(x, 1.0 - nu) / (gamma * (1.0 - nu)); },
             [gamma, nu](double y) { return std::pow(gamma * (1.0 - nu) * y, 1.0 / (1.0 - nu)); }};

    auto& t = m.transformed;
    t.alpha = p;
    t.beta = p;
    // Constants are estimated on a dense log grid; the caller attests boundedness of mu1, mu2.
    double sup_slope = -kInf;
    double sup_ratio = 0.0;
    for (double z : log_grid(4001, 1e-3, 1e3)) {
        const double slope = drift.d1(z);
        sup_slope = std::max(sup_slope, slope);
        sup_ratio = std::max(sup_ratio,
                             std::abs(slope) / (1.0 + std::pow(z, t.alpha) + std::pow(z, -t.beta)));
    }
    t.one_sided_constant = std::max(0.0, sup_slope) * 1.01 + 1e-9;
    t.lipschitz_constant = sup_ratio * 1.01 + 1e-9;
    t.drift = std::move(drift);
    t.diffusion = Diffusion{1.0, false};
    const double omega = 2.0 * mu1_at_zero / (gamma * gamma);
    switch (smooth_case) {
        case SmoothCase::InteriorPower:
            t.moments = {};
            break;
        case SmoothCase::SquareRoot:
            t.moments.inverse_sup = 2.0 * (omega - 1.0);
            break;
        case SmoothCase::SquareRootBounded:
            t.moments.inverse_sup = 2.0 * omega;
            break;
    }
    t.regularity = Regularity::SmoothDriftConstantDiffusion;
    t.rate = {ModelFamily::LocallySmooth, square_root ? std::optional<double>(omega) : std::nullopt,
              smooth_case, true};
    t.y0 = m.map.forward(x0);
    return m;
}

namespace {

double take(const ParamMap& params, const std::string& key, std::set<std::string>& used) {
    auto it = params.find(key);
    if (it == params.end()) {
        throw ConfigError("missing model parameter '" + key + "'");
    }
    used.insert(key);
    return it->second;
}

double take_or(const ParamMap& params, const std::string& key, double fallback,
               std::set<std::string>& used) {
    used.insert(key);
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void reject_unknown(const ParamMap& params, const std::set<std::string>& used,
                    const std::string& family) {
    for (const auto& [key, value] : params) {
        if (!used.count(key)) {
            throw ConfigError("unknown parameter '" + key + "' for model family '" + family + "'");
        }
    }
}

}  // namespace

ModelBundle make_model(const std::string& family, const ParamMap& params) {
    std::set<std::string> used;
    ModelBundle bundle;
    if (family == "cir") {
        const double kappa = take(params, "kappa", used);
        const double theta = take(params, "theta", used);
        const double xi = take(params, "xi", used);
        const double x0 = take(params, "x0", used);
        reject_unknown(params, used, family);
        bundle = cir_model(kappa, theta, xi, x0);
    } else if (family == "three_halves") {
        const double c1 = take(params, "c1", used);
        const double c2 = take(params, "c2", used);
        const double c3 = take(params, "c3", used);
        const double x0 = take(params, "x0", used);
        reject_unknown(params, used, family);
        bundle = three_halves_model(c1, c2, c3, x0);
    } else if (family == "ait_sahalia") {
        const double a_inv = take(params, "a_inv", used);
        const double a0 = take(params, "a0", used);
        const double a1 = take(params, "a1", used);
        const double a2 = take(params, "a2", used);
        const double gamma = take(params, "gamma", used);
        const double varrho = take(params, "varrho", used);
        const double rho = take(params, "rho", used);
        const double x0 = take(params, "x0", used);
        reject_unknown(params, used, family);
        bundle = ait_sahalia_model(a_inv, a0, a1, a2, gamma, varrho, rho, x0);
    } else if (family == "ginzburg_landau") {
        const double lambda = take(params, "lambda", used);
        const double sigma = take(params, "sigma", used);
        const double x0 = take(params, "x0", used);
        reject_unknown(params, used, family);
        bundle = ginzburg_landau_model(lambda, sigma, x0);
    } else if (family == "locally_smooth") {
        const double mu1 = take(params, "mu1", used);
        const double mu2 = take(params, "mu2", used);
        const double gamma = take(params, "gamma", used);
        const double nu = take(params, "nu", used);
        const double x0 = take(params, "x0", used);
        const bool bounded = take_or(params, "bounded", 0.0, used) != 0.0;
        reject_unknown(params, used, family);
        const SmoothCase smooth_case = nu != 0.5 ? SmoothCase::InteriorPower
                                       : bounded ? SmoothCase::SquareRootBounded
                                                 : SmoothCase::SquareRoot;
        bundle = locally_smooth_model(SmoothFunction::constant(mu1), SmoothFunction::constant(mu2),
                                      gamma, nu, x0, smooth_case);
    } else {
        throw ConfigError("unknown model family '" + family + "'");
    }
    bundle.params = params;
    return bundle;
}

// --- rate tables -----------------------------------------------------------

namespace {

RateValue exact(double r) { return {r, std::nullopt}; }
RateValue open_range(double lo, double hi) { return {std::nullopt, OpenInterval{lo, hi}}; }

// Shared square-root table: interval below, 1/2 in the middle band, first order above.
RateTable banded(double omega, double floor, double mid, double top, double interval_hi) {
    RateTable table{};
    if (!(omega > floor)) {
        std::ostringstream msg;
        msg << "no guaranteed rate for omega = " << omega << " <= " << floor;
        throw RateUnavailable(msg.str());
    }
    if (omega <= mid) {
        table.y_rate = open_range(1.0 / 6.0, interval_hi);
        table.source = RateSource::MomentBound;
    } else if (omega <= top) {
        table.y_rate = exact(0.5);
        table.source = RateSource::SmoothDrift;
    } else {
        table.y_rate = exact(1.0);
        table.source = RateSource::FirstOrder;
    }
    return table;
}

}  // namespace

RateTable guaranteed_rate(const TransformedModel& model) {
    const RateMetadata& meta = model.rate;
    switch (meta.family) {
        case ModelFamily::Cir: {
            const double omega = meta.omega.value();
            RateTable table = banded(omega, 2.0, 3.0, 5.0, 0.5 - 1.0 / (omega + 1.0));
            table.x_rate = table.y_rate;
            return table;
        }
        case ModelFamily::ThreeHalves: {
            const double omega = meta.omega.value();
            RateTable table = banded(omega, 2.0, 3.0, 5.0, 0.5 - 1.0 / (omega + 1.0));
            if (omega > 3.0) {
                table.x_rate = exact(*table.y_rate.exact / 2.0);
            }
            return table;
        }
        case ModelFamily::AitSahalia:
        case ModelFamily::GinzburgLandau: {
            if (!meta.gate) {
                throw RateUnavailable(
                    "no guaranteed rate for Ait-Sahalia with varrho + 1 <= 2 rho");
            }
            return {exact(1.0), exact(1.0), RateSource::FirstOrder};
        }
        case ModelFamily::LocallySmooth: {
            const SmoothCase smooth_case = meta.smooth_case.value();
            RateTable table{};
            if (smooth_case == SmoothCase::InteriorPower) {
                table = {exact(1.0), std::nullopt, RateSource::FirstOrder};
            } else if (smooth_case == SmoothCase::SquareRoot) {
                const double omega = meta.omega.value();
                table = banded(omega, 3.0, 4.0, 6.0, 0.5 - 1.0 / omega);
            } else {
                const double omega = meta.omega.value();
                if (!(omega > 3.0)) {
                    throw RateUnavailable("no guaranteed rate for bounded square-root case, omega <= 3");
                }
                table.y_rate = exact(omega <= 5.0 ? 0.5 : 1.0);
                table.source = RateSource::ComparisonBound;
            }
            table.x_rate = table.y_rate;
            return table;
        }
    }
    throw RateUnavailable("unknown model family");
}

// --- sampled checks --------------------------------------------------------

BoundCheck check_drift_bounds(const TransformedModel& model, std::size_t grid_points, double lo,
                              double hi) {
    const auto grid = log_grid(grid_points, lo, hi);
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] = model.f(grid[i]);

    BoundCheck check;
    check.worst_one_sided = -kInf;
    const double K = model.one_sided_constant;
    const double KL = model.lipschitz_constant;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = i + 1; j < grid.size(); ++j) {
            const double x = grid[i];
            const double y = grid[j];
            const double dx = x - y;
            const double df = values[i] - values[j];
            const double excess = dx * df - K * dx * dx;
            // Scale by the size of the terms so cancellation noise does not register.
            const double scale = std::abs(dx * df) + K * dx * dx + 1e-300;
            check.worst_one_sided = std::max(check.worst_one_sided, excess / scale);
            double bound = 1.0;
            if (model.alpha > 0.0) bound += std::pow(x, model.alpha) + std::pow(y, model.alpha);
            if (model.beta > 0.0) bound += std::pow(x, -model.beta) + std::pow(y, -model.beta);
            check.worst_local = std::max(check.worst_local, std::abs(df) / (KL * bound * std::abs(dx)));
            ++check.pairs;
        }
    }
    return check;
}

double lamperti_roundtrip_error(const LampertiMap& map, std::size_t grid_points, double lo,
                                double hi) {
    double worst = 0.0;
    for (double x : log_grid(grid_points, lo, hi)) {
        worst = std::max(worst, std::abs(map.inverse(map.forward(x)) - x) / std::abs(x));
    }
    return worst;
}

std::string to_string(ModelFamily family) {
    switch (family) {
        case ModelFamily::Cir: return "cir";
        case ModelFamily::ThreeHalves: return "three_halves";
        case ModelFamily::AitSahalia: return "ait_sahalia";
        case ModelFamily::GinzburgLandau: return "ginzburg_landau";
        case ModelFamily::LocallySmooth: return "locally_smooth";
    }
    return "unknown";
}

std::string to_string(Regularity regularity) {
    switch (regularity) {
        case Regularity::MomentsOnly: return "moments";
        case Regularity::SmoothDrift: return "smooth";
        case Regularity::SmoothDriftConstantDiffusion: return "smooth-const";
    }
    return "unknown";
}

std::string to_string(RateSource source) {
    switch (source) {
        case RateSource::MomentBound: return "moment-bound";
        case RateSource::SmoothDrift: return "smooth-drift";
        case RateSource::FirstOrder: return "first-order";
        case RateSource::ComparisonBound: return "comparison-bound";
    }
    return "unknown";
}

}  // namespace projem
