#include "projem/mlmc.hpp"

#include "projem/errors.hpp"
#include "projem/parallel.hpp"
#include "projem/reference_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace projem {

PayoffKind parse_payoff(const std::string& name) {
    if (name == "zcb") return PayoffKind::Zcb;
    if (name == "spread") return PayoffKind::Spread;
    if (name == "linear") return PayoffKind::Linear;
    throw ConfigError("unknown payoff '" + name + "'");
}

std::string to_string(PayoffKind kind) {
    switch (kind) {
        case PayoffKind::Zcb: return "zcb";
        case PayoffKind::Spread: return "spread";
        case PayoffKind::Linear: return "linear";
    }
    return "zcb";
}

double payoff_zcb(std::span<const double> rates, double T) {
    if (rates.size() < 2) throw LengthMismatch("rate path needs at least two nodes");
    const double h = T / double(rates.size() - 1);
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < rates.size(); ++i) integral += rates[i];
    return std::exp(-integral * h);
}

double payoff_spread(double x1, double x2, double strike) {
    return std::max(x1 - x2 - strike, 0.0);
}

void MlmcConfig::validate(std::size_t factor_count) const {
    if (refinement < 2) throw ConfigError("refinement factor must be at least 2");
    if (max_level < 1) throw ConfigError("max level must be at least 1");
    if (min_level < 1 || min_level > max_level) {
        throw ConfigError("min level must lie in [1, max level]");
    }
    if (std::pow(double(refinement), max_level) > 1e8) throw ConfigError("finest level is too fine");
    if (pilot_paths < 2) throw ConfigError("pilot needs at least 2 paths per level");
    if (!(T > 0.0)) throw ConfigError("time horizon must be positive");
    if (!(std::abs(correlation) <= 1.0)) throw ConfigError("correlation must lie in [-1, 1]");
    const std::size_t needed = payoff.kind == PayoffKind::Spread ? 2 : 1;
    if (factor_count < needed || factor_count > 2) {
        throw ConfigError("payoff '" + to_string(payoff.kind) + "' needs " +
                          std::to_string(needed) + " factor(s), got " +
                          std::to_string(factor_count));
    }
}

namespace {

constexpr std::uint32_t kStandardMcLevel = 1u << 23;

std::size_t ipow(std::size_t base, int exp) {
    std::size_t out = 1;
    for (int i = 0; i < exp; ++i) out *= base;
    return out;
}

// Payoff of one path on an n-step grid, for each factor stepping with the chosen scheme.
class PayoffPath {
public:
    PayoffPath(const std::vector<MlmcFactor>& factors, PathScheme scheme, std::size_t n, double T)
        : factors_(&factors), scheme_(scheme), n_(n), h_(T / double(n)) {
        for (const auto& f : factors) {
            if (scheme == PathScheme::Modified) {
                steppers_.emplace_back(f.model.transformed, f.plan, SchemeVariant::Modified, n, h_);
            } else {
                implicit_.push_back(ImplicitCirParams::from_model(f.model.transformed));
            }
        }
    }

    double operator()(const PayoffSpec& payoff, std::span<const double> dw0,
                      std::span<const double> dw1) const {
        switch (payoff.kind) {
            case PayoffKind::Zcb: return zcb(dw0);
            case PayoffKind::Spread:
                return payoff_spread(terminal(0, dw0), terminal(1, dw1), payoff.strike);
            case PayoffKind::Linear:
                if (factors_->size() > 1) {
                    return terminal(0, dw0) - terminal(1, dw1) - payoff.strike;
                }
                return terminal(0, dw0) - payoff.strike;
        }
        return 0.0;
    }

private:
    double to_x(std::size_t factor, double y) const {
        return (*factors_)[factor].model.map.inverse(std::max(y, 0.0));
    }

    double terminal(std::size_t factor, std::span<const double> dw) const {
        const double y0 = (*factors_)[factor].model.transformed.y0;
        const double y = scheme_ == PathScheme::Modified
                             ? steppers_[factor].terminal(y0, dw)
                             : implicit_cir_terminal(implicit_[factor], h_, dw);
        return to_x(factor, y);
    }

    double zcb(std::span<const double> dw) const {
        double integral = 0.0;
        const double y0 = (*factors_)[0].model.transformed.y0;
        if (scheme_ == PathScheme::Modified) {
            steppers_[0].walk(y0, dw, [&](std::size_t, double y) { integral += to_x(0, y); });
        } else {
            double y = y0;
            for (double d : dw) {
                integral += to_x(0, y);
                y = implicit_cir_step(y, implicit_[0], h_, d);
            }
        }
        return std::exp(-integral * h_);
    }

    const std::vector<MlmcFactor>* factors_;
    PathScheme scheme_;
    std::size_t n_;
    double h_;
    std::vector<Stepper> steppers_;
    std::vector<ImplicitCirParams> implicit_;
};

struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double delta = x - mean;
        mean += delta / double(n);
        m2 += delta * (x - mean);
    }

    void merge(const Moments& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double total = double(n + o.n);
        const double delta = o.mean - mean;
        mean += delta * double(o.n) / total;
        m2 += o.m2 + delta * delta * double(n) * double(o.n) / total;
        n += o.n;
    }

    double variance() const { return n > 1 ? m2 / double(n - 1) : 0.0; }
};

struct LevelStats {
    Moments diff;
    Moments fine;

    void merge(const LevelStats& o) {
        diff.merge(o.diff);
        fine.merge(o.fine);
    }
};

// Samples of one level: fine grid M^l, coarse grid M^(l-1), shared Brownian path.
class LevelKernel {
public:
    LevelKernel(const std::vector<MlmcFactor>& factors, int level, const MlmcConfig& config)
        : factors_(&factors),
          config_(&config),
          level_(level),
          fine_n_(ipow(config.refinement, level)),
          fine_(factors, PathScheme::Modified, fine_n_, config.T) {
        if (level > 0) {
            coarse_.emplace(factors, PathScheme::Modified, fine_n_ / config.refinement, config.T);
        }
    }

    std::pair<double, double> sample(const BrownianFabric& fabric, std::uint64_t path,
                                     std::vector<double>& buffer) const {
        const std::size_t n = fine_n_;
        const std::size_t nc = n / config_->refinement;
        const bool two = factors_->size() > 1;
        buffer.resize(3 * n + 2 * nc + 2);
        std::span<double> w(buffer.data(), n);
        std::span<double> w_perp(buffer.data() + n, n);
        std::span<double> z(buffer.data() + 2 * n, n);
        std::span<double> wc(buffer.data() + 3 * n, nc);
        std::span<double> zc(buffer.data() + 3 * n + nc, nc);

        const double h = config_->T / double(n);
        const std::uint32_t lvl = std::uint32_t(level_);
        fabric.increments({path, lvl, 0}, h, w);
        if (two) {
            fabric.increments({path, lvl, 1}, h, w_perp);
            correlate(w, w_perp, config_->correlation, z);
        }
        const double fine_value = fine_(config_->payoff, w, z);
        if (level_ == 0) return {fine_value, 0.0};
        couple_levels(w, config_->refinement, wc);
        if (two) couple_levels(z, config_->refinement, zc);
        return {fine_value, (*coarse_)(config_->payoff, wc, zc)};
    }

    std::size_t steps() const { return fine_n_; }

private:
    const std::vector<MlmcFactor>* factors_;
    const MlmcConfig* config_;
    int level_;
    std::size_t fine_n_;
    PayoffPath fine_;
    std::optional<PayoffPath> coarse_;
};

LevelStats run_level(const LevelKernel& kernel, const BrownianFabric& fabric,
                     std::uint64_t first_path, std::size_t count, unsigned threads) {
    constexpr std::size_t chunk = 256;
    const std::size_t chunks = (count + chunk - 1) / chunk;
    std::vector<LevelStats> partial(chunks);
    for_each_chunk(count, chunk, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        std::vector<double> buffer;
        LevelStats& s = partial[c];
        for (std::size_t i = begin; i < end; ++i) {
            const auto [fine, coarse] = kernel.sample(fabric, first_path + i, buffer);
            if (!std::isfinite(fine) || !std::isfinite(coarse)) {
                throw NonFinite(i, std::isfinite(fine) ? coarse : fine);
            }
            s.diff.add(fine - coarse);
            s.fine.add(fine);
        }
    });
    LevelStats total;
    for (const auto& p : partial) total.merge(p);
    return total;
}

// Geometric extrapolation of the remaining weak error from the top two level means.
// margin > 0 inflates each |mean| by that many standard errors, so that a pilot-noise
// underestimate cannot stop the level search one level early.
double bias_proxy(const std::vector<LevelStats>& stats, int top, std::size_t refinement,
                  double margin = 0.0) {
    const double m = double(refinement);
    auto size = [&](const Moments& d) {
        return std::abs(d.mean) + margin * std::sqrt(d.variance() / double(std::max<std::size_t>(d.n, 1)));
    };
    double value = size(stats[top].diff);
    if (top >= 2) value = std::max(value, size(stats[top - 1].diff) / m);
    return value / (m - 1.0);
}

constexpr double kSelectionMargin = 2.0;

}  // namespace

std::pair<double, double> level_sample(const std::vector<MlmcFactor>& factors, int level,
                                       const MlmcConfig& config, const BrownianFabric& fabric,
                                       std::uint64_t path) {
    config.validate(factors.size());
    if (level < 0 || level > config.max_level) throw ConfigError("level out of range");
    LevelKernel kernel(factors, level, config);
    std::vector<double> buffer;
    return kernel.sample(fabric, path, buffer);
}

std::vector<std::size_t> allocate_paths(std::span<const double> variances,
                                        std::span<const double> steps, double epsilon,
                                        std::size_t floor) {
    if (variances.size() != steps.size() || variances.empty()) {
        throw LengthMismatch("need one variance per level");
    }
    if (!(epsilon > 0.0)) throw DomainError("target RMSE must be positive");
    double sum = 0.0;
    for (std::size_t l = 0; l < variances.size(); ++l) {
        if (!(variances[l] >= 0.0) || !(steps[l] > 0.0)) {
            throw DomainError("variances must be non-negative and step sizes positive");
        }
        sum += std::sqrt(variances[l] / steps[l]);
    }
    std::vector<std::size_t> paths(variances.size());
    for (std::size_t l = 0; l < variances.size(); ++l) {
        const double n = std::ceil(2.0 / (epsilon * epsilon) * std::sqrt(variances[l] * steps[l]) * sum);
        paths[l] = std::max<std::size_t>(floor, n > 0.0 ? std::size_t(n) : 0);
    }
    return paths;
}

MlmcReport mlmc_estimate(const std::vector<MlmcFactor>& factors, const MlmcConfig& config,
                         double epsilon, const BrownianFabric& fabric) {
    config.validate(factors.size());
    if (!(epsilon > 0.0)) throw ConfigError("target RMSE must be positive");
    const int L = config.max_level;
    const std::size_t M = config.refinement;

    std::vector<LevelKernel> kernels;
    std::vector<double> h(L + 1);
    for (int l = 0; l <= L; ++l) {
        kernels.emplace_back(factors, l, config);
        h[l] = config.T / double(ipow(M, l));
    }

    // Pilot up to the lowest admissible top level; with bias selection, finer levels are
    // added one at a time until the bias proxy fits the budget.
    std::vector<LevelStats> stats;
    auto pilot = [&](int l) {
        stats.push_back(run_level(kernels[l], fabric, 0, config.pilot_paths, config.threads));
    };
    int top = config.selection == LevelSelection::Bias ? config.min_level : L;
    for (int l = 0; l <= top; ++l) pilot(l);
    while (top < L && bias_proxy(stats, top, M, kSelectionMargin) > epsilon / std::sqrt(2.0)) {
        pilot(++top);
    }

    // Main phase, then one refinement pass with the updated variances.
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<double> v(top + 1), hh(h.begin(), h.begin() + top + 1);
        for (int l = 0; l <= top; ++l) v[l] = stats[l].diff.variance();
        const auto target = allocate_paths(v, hh, epsilon, config.pilot_paths);
        double total = 0.0;
        for (auto n : target) total += double(n);
        if (total > double(config.path_ceiling)) {
            throw BudgetExceeded("allocation of " + std::to_string(std::llround(total)) +
                                 " paths exceeds the ceiling of " +
                                 std::to_string(config.path_ceiling));
        }
        for (int l = 0; l <= top; ++l) {
            if (target[l] <= stats[l].diff.n) continue;
            const std::size_t extra = target[l] - stats[l].diff.n;
            stats[l].merge(run_level(kernels[l], fabric, stats[l].diff.n, extra, config.threads));
        }
    }

    MlmcReport report;
    report.epsilon = epsilon;
    report.seed = fabric.seed();
    report.active_level = top;
    for (int l = 0; l <= top; ++l) {
        LevelReport lr;
        lr.level = l;
        lr.h = h[l];
        lr.paths = stats[l].diff.n;
        lr.mean_diff = stats[l].diff.mean;
        lr.var_diff = stats[l].diff.variance();
        lr.mean_fine = stats[l].fine.mean;
        lr.var_fine = stats[l].fine.variance();
        lr.cost = double(lr.paths) * double(kernels[l].steps());
        report.levels.push_back(lr);
        report.estimate += lr.mean_diff;
        report.variance += lr.var_diff / double(lr.paths);
        report.mlmc_cost += lr.cost;
    }
    report.bias = bias_proxy(stats, top, M);
    report.rmse = std::sqrt(report.variance + report.bias * report.bias);
    report.std_cost = 2.0 * report.levels[top].var_fine * double(kernels[top].steps()) /
                      (epsilon * epsilon);
    report.savings = report.std_cost / report.mlmc_cost;
    return report;
}

std::uint64_t replication_seed(std::uint64_t seed, std::size_t replication) {
    // splitmix64 finaliser over (seed, replication).
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (std::uint64_t(replication) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

ReplicationSummary mlmc_replications(const std::vector<MlmcFactor>& factors,
                                     const MlmcConfig& config, double epsilon, std::uint64_t seed,
                                     std::size_t count, double reference) {
    ReplicationSummary summary;
    double sq = 0.0;
    for (std::size_t r = 0; r < count; ++r) {
        const BrownianFabric fabric(replication_seed(seed, r));
        const double value = mlmc_estimate(factors, config, epsilon, fabric).estimate;
        summary.estimates.push_back(value);
        sq += (value - reference) * (value - reference);
        summary.mean += value;
    }
    if (count > 0) {
        summary.mean /= double(count);
        summary.empirical_rmse = std::sqrt(sq / double(count));
        for (double v : summary.estimates) {
            summary.variance += (v - summary.mean) * (v - summary.mean);
        }
        if (count > 1) summary.variance /= double(count - 1);
    }
    return summary;
}

McPrice standard_mc_price(const std::vector<MlmcFactor>& factors, const PayoffSpec& payoff,
                          double correlation, double T, std::size_t steps, std::size_t paths,
                          PathScheme scheme, const BrownianFabric& fabric, unsigned threads) {
    if (steps < 1 || paths < 2) throw ConfigError("need at least 1 step and 2 paths");
    if (!(std::abs(correlation) <= 1.0)) throw ConfigError("correlation must lie in [-1, 1]");
    const bool two = factors.size() > 1;
    if (payoff.kind == PayoffKind::Spread && !two) throw ConfigError("spread needs two factors");
    const PayoffPath path_payoff(factors, scheme, steps, T);
    const double h = T / double(steps);

    constexpr std::size_t chunk = 256;
    std::vector<Moments> partial((paths + chunk - 1) / chunk);
    for_each_chunk(paths, chunk, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        std::vector<double> w(steps), w_perp(two ? steps : 0), z(two ? steps : 0);
        for (std::size_t p = begin; p < end; ++p) {
            fabric.increments({p, kStandardMcLevel, 0}, h, w);
            if (two) {
                fabric.increments({p, kStandardMcLevel, 1}, h, w_perp);
                correlate(w, w_perp, correlation, z);
            }
            partial[c].add(path_payoff(payoff, w, z));
        }
    });
    Moments total;
    for (const auto& m : partial) total.merge(m);
    McPrice out;
    out.price = total.mean;
    out.paths = total.n;
    out.std_error = std::sqrt(total.variance() / double(total.n));
    out.half_width = 1.959963984540054 * out.std_error;
    return out;
}

}  // namespace projem
