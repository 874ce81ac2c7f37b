#include "projem/reference_solvers.hpp"

#include "projem/errors.hpp"

#include <cmath>

namespace projem {

ImplicitCirParams ImplicitCirParams::from_cir(double kappa, double theta, double xi, double x0) {
    const auto [a, b, c] = cir_coefficients(kappa, theta, xi);
    return {a, b, c, std::sqrt(x0)};
}

ImplicitCirParams ImplicitCirParams::from_model(const TransformedModel& model) {
    const auto* drift = std::get_if<ReciprocalLinearDrift>(&model.drift);
    if (!drift || model.diffusion.linear) {
        throw DomainError("implicit reference needs a drift a/x + bx with constant diffusion");
    }
    return {drift->a, drift->b, model.diffusion.scale, model.y0};
}

double implicit_cir_step(double y, const ImplicitCirParams& p, double h, double dW) {
    const double denom = 1.0 - p.b * h;
    const double A = (y + p.c * dW) / denom;
    const double B = p.a * h / denom;
    // Root of r^2 - A r - B = 0; the second form avoids cancellation when A < 0.
    const double disc = std::sqrt(0.25 * A * A + B);
    if (A >= 0.0) return 0.5 * A + disc;
    return B / (disc - 0.5 * A);
}

double implicit_cir_terminal(const ImplicitCirParams& params, double h,
                             std::span<const double> increments) {
    double y = params.y0;
    for (double dW : increments) y = implicit_cir_step(y, params, h, dW);
    return y;
}

std::vector<double> ginzburg_landau_exact(double lambda, double sigma, double x0,
                                          const SchemeGrid& grid, std::span<const double> W) {
    if (W.size() != grid.n + 1) {
        throw LengthMismatch("need Brownian values at all " + std::to_string(grid.n + 1) +
                             " grid nodes");
    }
    const double h = grid.h();
    std::vector<double> x(grid.n + 1);
    double integral = 0.0;
    for (std::size_t i = 0; i <= grid.n; ++i) {
        const double t = grid.time(i);
        x[i] = x0 * std::exp(lambda * t + sigma * W[i]) / std::sqrt(1.0 + 2.0 * x0 * x0 * integral);
        integral += std::exp(2.0 * lambda * t + 2.0 * sigma * W[i]) * h;
    }
    return x;
}

double ginzburg_landau_exact_terminal(double lambda, double sigma, double x0, double T,
                                      std::span<const double> increments) {
    const std::size_t n = increments.size();
    const double h = T / double(n);
    double w = 0.0;
    double integral = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        integral += std::exp(2.0 * lambda * (T * double(i) / double(n)) + 2.0 * sigma * w) * h;
        w += increments[i];
    }
    return x0 * std::exp(lambda * T + sigma * w) / std::sqrt(1.0 + 2.0 * x0 * x0 * integral);
}

double cir_zcb_closed_form(double kappa, double theta, double xi, double v0, double T) {
    if (!(kappa > 0.0 && theta > 0.0 && xi > 0.0 && v0 >= 0.0 && T >= 0.0)) {
        throw DomainError("bond formula needs positive kappa, theta, xi and non-negative v0, T");
    }
    const double lam = std::sqrt(kappa * kappa + 2.0 * xi * xi);
    const double growth = std::expm1(T * lam);
    const double denom = 2.0 * lam + (kappa + lam) * growth;
    // log A in a form without cancellation for small xi: with d = lam - kappa,
    // A^(xi^2 / 2 kappa theta) = 2 lam e^{-dT/2} / (kappa + lam + d e^{-lam T}).
    const double sum = kappa + lam;
    const double d = 2.0 * xi * xi / sum;
    const double log_base =
        std::log1p(d / sum) - std::log1p(d * std::exp(-lam * T) / sum) - 0.5 * d * T;
    const double A = std::exp(2.0 * kappa * theta / (xi * xi) * log_base);
    const double C = 2.0 * growth / denom;
    return A * std::exp(-C * v0);
}

}  // namespace projem
