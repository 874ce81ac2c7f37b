#pragma once

#include "projem/projection_scheme.hpp"
#include "projem/sde_models.hpp"

#include <span>
#include <vector>

namespace projem {

/// Coefficients of dY = (a/Y + bY) dt + c dW for the drift-implicit square-root scheme.
struct ImplicitCirParams {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double y0 = 1.0;

    static ImplicitCirParams from_cir(double kappa, double theta, double xi, double x0);
    /// Any model whose transformed drift is a/x + bx (CIR, 3/2).
    static ImplicitCirParams from_model(const TransformedModel& model);
};

/// Positive root y' of y' = y + (a/y' + b y') h + c dW.
double implicit_cir_step(double y, const ImplicitCirParams& params, double h, double dW);

/// Terminal value of the implicit scheme over the given increments.
double implicit_cir_terminal(const ImplicitCirParams& params, double h,
                             std::span<const double> increments);

/// Closed-form Ginzburg-Landau trajectory on the grid of the Brownian values.
/// The time integral uses a left-endpoint sum on the same grid; W[0] must be 0.
std::vector<double> ginzburg_landau_exact(double lambda, double sigma, double x0,
                                          const SchemeGrid& grid, std::span<const double> W);

/// Terminal value of ginzburg_landau_exact computed from increments instead of W values.
double ginzburg_landau_exact_terminal(double lambda, double sigma, double x0, double T,
                                      std::span<const double> increments);

/// Zero-coupon bond price E[exp(-int_0^T v ds)] under CIR dynamics for v.
double cir_zcb_closed_form(double kappa, double theta, double xi, double v0, double T);

}  // namespace projem
