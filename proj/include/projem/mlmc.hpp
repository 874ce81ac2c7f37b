#pragma once

#include "projem/path_engine.hpp"
#include "projem/projection_scheme.hpp"
#include "projem/sde_models.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace projem {

enum class PayoffKind {
    Zcb,     // exp(-int v ds) on the first factor
    Spread,  // max(X1_T - X2_T - K, 0)
    Linear,  // X1_T - X2_T - K (or X1_T - K for one factor); for testing
};

struct PayoffSpec {
    PayoffKind kind = PayoffKind::Zcb;
    double strike = 0.0;
};

PayoffKind parse_payoff(const std::string& name);
std::string to_string(PayoffKind kind);

/// exp(-h * sum_{i<n} v_i) for the n+1 node values of v on [0, T].
double payoff_zcb(std::span<const double> rates, double T);

double payoff_spread(double x1, double x2, double strike);

/// One Brownian factor: a model and the projection used to simulate it.
struct MlmcFactor {
    ModelBundle model;
    ProjectionPlan plan;
};

/// Time-stepping used for payoff paths.
enum class PathScheme { Modified, Implicit };

enum class LevelSelection {
    Bias,   // smallest level >= min_level whose bias estimate fits the budget
    Fixed,  // always max_level
};

struct MlmcConfig {
    std::size_t refinement = 4;
    int max_level = 5;
    int min_level = 2;
    std::size_t pilot_paths = 10000;
    PayoffSpec payoff;
    double correlation = 0.0;
    double T = 1.0;
    std::size_t path_ceiling = 2000000000;
    LevelSelection selection = LevelSelection::Bias;
    unsigned threads = 0;

    void validate(std::size_t factor_count) const;
};

/// (P_l, P_{l-1}) on one Brownian path; P_{-1} = 0.
std::pair<double, double> level_sample(const std::vector<MlmcFactor>& factors, int level,
                                       const MlmcConfig& config, const BrownianFabric& fabric,
                                       std::uint64_t path);

/// N_l = ceil(2/eps^2 sqrt(V_l h_l) sum_j sqrt(V_j / h_j)), at least floor.
std::vector<std::size_t> allocate_paths(std::span<const double> variances,
                                        std::span<const double> steps, double epsilon,
                                        std::size_t floor = 1);

struct LevelReport {
    int level = 0;
    double h = 0.0;
    std::size_t paths = 0;
    double mean_diff = 0.0;
    double var_diff = 0.0;
    double mean_fine = 0.0;  // mean of P_l
    double var_fine = 0.0;   // variance of P_l
    double cost = 0.0;       // paths * steps
};

struct MlmcReport {
    double epsilon = 0.0;
    std::vector<LevelReport> levels;  // levels 0..active_level
    int active_level = 0;             // top level entering the estimator
    double estimate = 0.0;
    double variance = 0.0;            // sum V_l / N_l over active levels
    double bias = 0.0;                // weak-order-1 extrapolation proxy
    double rmse = 0.0;
    double mlmc_cost = 0.0;
    double std_cost = 0.0;
    double savings = 0.0;
    std::uint64_t seed = 0;
};

/// Pilot, allocation, main phase and one refinement pass.
MlmcReport mlmc_estimate(const std::vector<MlmcFactor>& factors, const MlmcConfig& config,
                         double epsilon, const BrownianFabric& fabric);

/// Seed of the r-th independent replication.
std::uint64_t replication_seed(std::uint64_t seed, std::size_t replication);

struct ReplicationSummary {
    std::vector<double> estimates;
    double empirical_rmse = 0.0;  // against the supplied reference value
    double mean = 0.0;
    double variance = 0.0;
};

ReplicationSummary mlmc_replications(const std::vector<MlmcFactor>& factors,
                                     const MlmcConfig& config, double epsilon, std::uint64_t seed,
                                     std::size_t count, double reference);

struct McPrice {
    double price = 0.0;
    double std_error = 0.0;
    double half_width = 0.0;  // 95% normal confidence half-width
    std::size_t paths = 0;
};

/// Single-level Monte Carlo with n steps per path.
McPrice standard_mc_price(const std::vector<MlmcFactor>& factors, const PayoffSpec& payoff,
                          double correlation, double T, std::size_t steps, std::size_t paths,
                          PathScheme scheme, const BrownianFabric& fabric, unsigned threads = 0);

}  // namespace projem
