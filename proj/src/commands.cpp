#include "projem/commands.hpp"

#include "projem/errors.hpp"
#include "projem/reference_solvers.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>

namespace projem {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string format_number(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
}

ExperimentConfig load_with_overrides(const std::string& path, const CommandOptions& options) {
    ExperimentConfig cfg = load_config(path);
    if (options.out) cfg.output = *options.out;
    if (options.seed) cfg.seed = *options.seed;
    if (options.threads) cfg.threads = *options.threads;
    return cfg;
}

fs::path prepare_output(const ExperimentConfig& cfg) {
    fs::path dir(cfg.output);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + cfg.output + "': " + ec.message());
    return dir;
}

json report_header(const std::string& command, const ExperimentConfig& cfg) {
    return {{"spec_version", kReportVersion},
            {"command", command},
            {"seed", cfg.seed},
            {"config", to_json(cfg)}};
}

double require_param(const ModelConfig& model, const char* key) {
    auto it = model.params.find(key);
    if (it == model.params.end()) {
        throw ConfigError(std::string("model.params.") + key + " is required for this command");
    }
    return it->second;
}

// Maps library exceptions onto the documented exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const BudgetExceeded& e) {
        err << "budget exceeded: " << e.what() << "\n";
        return exit_code::budget;
    } catch (const FellerViolation& e) {
        err << "model error: " << e.what() << "\n";
        return exit_code::model;
    } catch (const DomainError& e) {
        err << "model error: " << e.what() << "\n";
        return exit_code::model;
    } catch (const PlanInfeasible& e) {
        err << "model error: " << e.what() << "\n";
        return exit_code::model;
    } catch (const MissingThreshold& e) {
        err << "model error: " << e.what() << "\n";
        return exit_code::model;
    } catch (const RateUnavailable& e) {
        err << "model error: " << e.what() << "\n";
        return exit_code::model;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::failure;
    }
}

}  // namespace

int cmd_convergence(const std::string& config_path, const CommandOptions& options,
                    std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ExperimentConfig cfg = load_with_overrides(config_path, options);
        const StudySpec spec = make_study_spec(cfg);
        const ModelBundle model = make_model(cfg.model.family, cfg.model.params);
        const ProjectionPlan plan = build_plan(model.transformed, cfg.scheme);

        // Read-out thresholds must exist before any work is done.
        clamp_variant(1.0, spec.readout, plan, spec.T);

        const ConvergenceReport report =
            run_convergence_study(model, plan, spec, BrownianFabric(cfg.seed));

        const fs::path dir = prepare_output(cfg);
        std::string csv = "N,steps,error,M\n";
        json records = json::array();
        std::size_t fittable = 0;
        for (const auto& r : report.records) {
            csv += std::to_string(r.N) + "," + std::to_string(r.steps) + "," +
                   format_number(r.error) + "," + std::to_string(r.paths) + "\n";
            records.push_back({{"N", r.N},
                               {"steps", r.steps},
                               {"error", r.error},
                               {"M", r.paths},
                               {"diverged", r.diverged}});
            if (!r.diverged) ++fittable;
        }
        json doc = report_header("convergence", cfg);
        doc["model"] = {{"family", model.family}, {"params", cfg.model.params}};
        doc["plan"] = to_json(plan);
        doc["records"] = records;
        doc["fit"] = report.fit ? json{{"slope", report.fit->slope},
                                       {"intercept", report.fit->intercept},
                                       {"r_squared", report.fit->r_squared}}
                                : json(nullptr);
        write_file(dir / "convergence.csv", csv);
        write_file(dir / "convergence.json", doc.dump(2) + "\n");

        for (const auto& r : report.records) {
            out << "N=" << r.N << " steps=" << r.steps << " error=" << format_number(r.error)
                << (r.diverged ? " (diverged)" : "") << "\n";
        }
        if (report.fit) {
            out << "rate " << std::fixed << std::setprecision(4) << report.fit->slope
                << "  R^2 " << report.fit->r_squared << "\n";
        } else {
            out << "rate unavailable: fewer than 3 converged records\n";
        }
        return fittable == 0 ? exit_code::diverged : exit_code::ok;
    });
}

int cmd_mlmc(const std::string& config_path, const CommandOptions& options, std::ostream& out,
             std::ostream& err) {
    return guarded(err, [&] {
        const ExperimentConfig cfg = load_with_overrides(config_path, options);
        const MlmcConfig mc = make_mlmc_config(cfg);
        const MlmcBlock& m = *cfg.mlmc;
        const std::vector<MlmcFactor> factors = build_factors(cfg);
        mc.validate(factors.size());

        std::optional<double> reference = m.reference_price;
        if (!reference && mc.payoff.kind == PayoffKind::Zcb && cfg.model.family == "cir") {
            reference = cir_zcb_closed_form(require_param(cfg.model, "kappa"),
                                            require_param(cfg.model, "theta"),
                                            require_param(cfg.model, "xi"),
                                            require_param(cfg.model, "x0"), m.T);
        }

        std::vector<MlmcReport> reports;
        std::vector<std::optional<ReplicationSummary>> replications;
        const BrownianFabric fabric(cfg.seed);
        for (double eps : m.epsilons) {
            reports.push_back(mlmc_estimate(factors, mc, eps, fabric));
            if (m.replications > 0 && reference) {
                replications.push_back(
                    mlmc_replications(factors, mc, eps, cfg.seed, m.replications, *reference));
            } else {
                replications.emplace_back();
            }
        }

        const fs::path dir = prepare_output(cfg);
        std::string summary = "epsilon,estimate,rmse,ratio,savings,active_level,mlmc_cost,std_cost";
        summary += ",empirical_rmse\n";
        out << "     RMSE     Target ε    Ratio    Savings    Estimate     Levels\n";
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const MlmcReport& r = reports[i];
            char tag_buf[32];
            std::snprintf(tag_buf, sizeof tag_buf, "%g", r.epsilon);
            const std::string tag = tag_buf;
            std::string csv = "l,h_l,N_l,mean_diff,V_l,cost\n";
            json levels = json::array();
            for (const auto& lr : r.levels) {
                csv += std::to_string(lr.level) + "," + format_number(lr.h) + "," +
                       std::to_string(lr.paths) + "," + format_number(lr.mean_diff) + "," +
                       format_number(lr.var_diff) + "," + format_number(lr.cost) + "\n";
                levels.push_back({{"l", lr.level},
                                  {"h_l", lr.h},
                                  {"N_l", lr.paths},
                                  {"mean_diff", lr.mean_diff},
                                  {"V_l", lr.var_diff},
                                  {"mean_P", lr.mean_fine},
                                  {"var_P", lr.var_fine},
                                  {"cost", lr.cost},
                                  {"active", lr.level <= r.active_level}});
            }
            json doc = report_header("mlmc", cfg);
            doc["epsilon"] = r.epsilon;
            doc["estimate"] = r.estimate;
            doc["variance"] = r.variance;
            doc["bias_estimate"] = r.bias;
            doc["rmse_estimate"] = r.rmse;
            doc["active_level"] = r.active_level;
            doc["mlmc_cost"] = r.mlmc_cost;
            doc["std_mc_cost"] = r.std_cost;
            doc["savings"] = r.savings;
            doc["levels"] = levels;
            doc["plans"] = json::array();
            for (const auto& f : factors) doc["plans"].push_back(to_json(f.plan));
            doc["reference_price"] = reference ? json(*reference) : json(nullptr);
            json emp = nullptr;
            if (replications[i]) {
                emp = {{"count", replications[i]->estimates.size()},
                       {"empirical_rmse", replications[i]->empirical_rmse},
                       {"mean", replications[i]->mean},
                       {"variance", replications[i]->variance}};
            }
            doc["replications"] = emp;
            write_file(dir / ("mlmc_eps_" + tag + ".json"), doc.dump(2) + "\n");
            write_file(dir / ("mlmc_eps_" + tag + "_levels.csv"), csv);

            summary += tag + "," + format_number(r.estimate) + "," + format_number(r.rmse) + "," +
                       format_number(r.rmse / r.epsilon) + "," + format_number(r.savings) + "," +
                       std::to_string(r.active_level) + "," + format_number(r.mlmc_cost) + "," +
                       format_number(r.std_cost) + "," +
                       (replications[i] ? format_number(replications[i]->empirical_rmse) : "") +
                       "\n";
            char line[160];
            std::snprintf(line, sizeof line, "%9.6f  %9.6f  %7.3f  %9.2f  %10.7f  %6d\n", r.rmse,
                          r.epsilon, r.rmse / r.epsilon, r.savings, r.estimate,
                          r.active_level + 1);
            out << line;
        }
        write_file(dir / "mlmc_summary.csv", summary);
        return exit_code::ok;
    });
}

int cmd_price(const std::string& config_path, const CommandOptions& options, std::ostream& out,
              std::ostream& err) {
    return guarded(err, [&] {
        const ExperimentConfig cfg = load_with_overrides(config_path, options);
        if (!cfg.price) throw ConfigError("config field 'price' is required for price");
        const PriceBlock& p = *cfg.price;
        json doc = report_header("price", cfg);
        McPrice result;
        if (p.mode == "closed-form") {
            if (cfg.model.family != "cir" || p.payoff != "zcb") {
                throw ConfigError("closed-form pricing supports the cir bond only");
            }
            make_model(cfg.model.family, cfg.model.params);  // validates parameters
            result.price = cir_zcb_closed_form(
                require_param(cfg.model, "kappa"), require_param(cfg.model, "theta"),
                require_param(cfg.model, "xi"), require_param(cfg.model, "x0"), p.T);
            result.paths = 0;
        } else if (p.mode == "exact") {
            if (cfg.model.family != "ginzburg_landau") {
                throw ConfigError("exact pricing supports ginzburg_landau only");
            }
            make_model(cfg.model.family, cfg.model.params);
            const double lambda = require_param(cfg.model, "lambda");
            const double sigma = require_param(cfg.model, "sigma");
            const double x0 = require_param(cfg.model, "x0");
            const BrownianFabric fabric(cfg.seed);
            double sum = 0.0, sq = 0.0;
            std::vector<double> dw(p.steps);
            for (std::size_t path = 0; path < p.paths; ++path) {
                fabric.increments({path, 0, 0}, p.T / double(p.steps), dw);
                const double v =
                    ginzburg_landau_exact_terminal(lambda, sigma, x0, p.T, dw) - p.strike;
                sum += v;
                sq += v * v;
            }
            const double n = double(p.paths);
            result.price = sum / n;
            const double var = std::max(0.0, (sq - n * result.price * result.price) / (n - 1.0));
            result.std_error = sigma == 0.0 ? 0.0 : std::sqrt(var / n);
            result.half_width = 1.959963984540054 * result.std_error;
            result.paths = p.paths;
        } else {
            const std::vector<MlmcFactor> factors = build_factors(cfg);
            const PayoffSpec payoff{parse_payoff(p.payoff), p.strike};
            result = standard_mc_price(factors, payoff, cfg.correlation, p.T, p.steps, p.paths,
                                       p.scheme == "implicit" ? PathScheme::Implicit
                                                              : PathScheme::Modified,
                                       BrownianFabric(cfg.seed), cfg.threads);
        }
        doc["mode"] = p.mode;
        doc["price"] = result.price;
        doc["half_width"] = result.half_width;
        doc["std_error"] = result.std_error;
        doc["paths"] = result.paths;
        const fs::path dir = prepare_output(cfg);
        write_file(dir / "price.json", doc.dump(2) + "\n");
        out << "price " << format_number(result.price);
        if (p.mode != "closed-form") out << " +/- " << format_number(result.half_width) << " (95%)";
        out << "\n";
        return exit_code::ok;
    });
}

}  // namespace projem
