#pragma once

#include "projem/convergence.hpp"
#include "projem/mlmc.hpp"
#include "projem/projection_scheme.hpp"
#include "projem/sde_models.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace projem {

inline constexpr const char* kReportVersion = "1.0";

struct ModelConfig {
    std::string family;
    ParamMap params;

    bool operator==(const ModelConfig&) const = default;
};

struct SchemeConfig {
    std::string variant = "modified";     // modified | classical
    std::optional<double> k;              // hand-set exponents bypass the planner
    std::optional<double> k_prime;
    double scale_lo = 1.0;
    double scale_hi = 1.0;
    std::string readout = "raw";          // raw | bar | tilde | check | double
    std::string regime = "auto";          // auto | moments | smooth | smooth-const
    std::optional<double> q;
    std::optional<double> q_prime;
    bool symmetric = false;

    bool operator==(const SchemeConfig&) const = default;
};

struct StudyConfig {
    double T = 1.0;
    int n_min = 3;
    int n_max = 9;
    std::size_t paths = 10000;
    std::string reference = "implicit";   // closed-form | implicit | modified
    int fine_exponent = 12;
    std::string target_space = "x";       // x | y

    bool operator==(const StudyConfig&) const = default;
};

struct MlmcBlock {
    std::size_t refinement = 4;
    int max_level = 5;
    int min_level = 2;
    std::vector<double> epsilons;
    std::size_t pilot_paths = 10000;
    std::string payoff = "zcb";           // zcb | spread | linear
    double strike = 0.0;
    double T = 1.0;
    std::size_t replications = 0;
    std::optional<double> reference_price;
    std::size_t path_ceiling = 2000000000;
    std::string selection = "bias";       // bias | fixed

    bool operator==(const MlmcBlock&) const = default;
};

struct PriceBlock {
    std::string mode = "closed-form";     // closed-form | mc | exact
    std::string scheme = "modified";      // modified | implicit (mc mode)
    std::size_t paths = 100000;
    std::size_t steps = 256;
    std::string payoff = "zcb";
    double strike = 0.0;
    double T = 1.0;

    bool operator==(const PriceBlock&) const = default;
};

struct ExperimentConfig {
    ModelConfig model;
    std::optional<ModelConfig> second_model;
    double correlation = 0.0;
    SchemeConfig scheme;
    std::optional<StudyConfig> study;
    std::optional<MlmcBlock> mlmc;
    std::optional<PriceBlock> price;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string output = "out";

    bool operator==(const ExperimentConfig&) const = default;
};

/// Strict parse: unknown keys and wrong types raise ConfigError naming the field path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const ProjectionPlan& plan);

/// Builds the projection plan described by a scheme block for a model.
ProjectionPlan build_plan(const TransformedModel& model, const SchemeConfig& scheme);

Regularity parse_regime(const std::string& name);

/// One factor per model block, each with the plan of the shared scheme block.
std::vector<MlmcFactor> build_factors(const ExperimentConfig& config);

/// Study and MLMC settings of a config; throw ConfigError when the block is absent.
StudySpec make_study_spec(const ExperimentConfig& config);
MlmcConfig make_mlmc_config(const ExperimentConfig& config);

}  // namespace projem
