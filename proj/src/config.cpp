#include "projem/config.hpp"

#include "projem/errors.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace projem {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers can be rejected.
class Fields {
public:
    Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    }

    bool has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }

    void used(const std::string& key) { used_.insert(key); }

    const json& raw(const std::string& key) {
        used_.insert(key);
        if (!obj_.contains(key)) fail(at(key), "is required");
        return obj_.at(key);
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) fail(at(key), "expected a number");
        return v.get<double>();
    }

    std::int64_t integer(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number_integer()) fail(at(key), "expected an integer");
        return v.get<std::int64_t>();
    }

    std::size_t count(const std::string& key) {
        const std::int64_t v = integer(key);
        if (v < 0) fail(at(key), "must be non-negative");
        return std::size_t(v);
    }

    std::string text(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) fail(at(key), "expected a string");
        return v.get<std::string>();
    }

    bool flag(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_boolean()) fail(at(key), "expected true or false");
        return v.get<bool>();
    }

    template <class T, class Read>
    void optional_into(const std::string& key, T& target, Read read) {
        used_.insert(key);
        if (has(key)) target = (this->*read)(key);
    }

    void finish() const {
        for (const auto& [key, value] : obj_.items()) {
            if (!used_.count(key)) fail(at(key), "is not a recognised field");
        }
    }

    [[noreturn]] static void fail(const std::string& where, const std::string& what) {
        throw ConfigError("config field '" + where + "' " + what);
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> used_;
};

ModelConfig parse_model(const json& doc, const std::string& path) {
    Fields f(doc, path);
    ModelConfig model;
    model.family = f.text("family");
    const json& params = f.raw("params");
    if (!params.is_object()) Fields::fail(f.at("params"), "expected an object");
    for (const auto& [key, value] : params.items()) {
        if (value.is_boolean()) {
            model.params[key] = value.get<bool>() ? 1.0 : 0.0;
        } else if (value.is_number()) {
            model.params[key] = value.get<double>();
        } else {
            Fields::fail(f.at("params") + "." + key, "expected a number");
        }
    }
    f.finish();
    return model;
}

SchemeConfig parse_scheme(const json& doc) {
    Fields f(doc, "scheme");
    SchemeConfig s;
    f.optional_into("variant", s.variant, &Fields::text);
    f.optional_into("k", s.k, &Fields::number);
    f.optional_into("k_prime", s.k_prime, &Fields::number);
    f.optional_into("scale_lo", s.scale_lo, &Fields::number);
    f.optional_into("scale_hi", s.scale_hi, &Fields::number);
    f.optional_into("readout", s.readout, &Fields::text);
    f.optional_into("regime", s.regime, &Fields::text);
    f.optional_into("q", s.q, &Fields::number);
    f.optional_into("q_prime", s.q_prime, &Fields::number);
    f.optional_into("symmetric", s.symmetric, &Fields::flag);
    f.finish();
    try {
        parse_variant(s.variant);
        parse_readout(s.readout);
        if (s.regime != "auto") parse_regime(s.regime);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("in 'scheme': ") + e.what());
    }
    return s;
}

StudyConfig parse_study(const json& doc) {
    Fields f(doc, "study");
    StudyConfig s;
    f.optional_into("T", s.T, &Fields::number);
    std::int64_t n_min = s.n_min, n_max = s.n_max, fine = s.fine_exponent;
    f.optional_into("n_min", n_min, &Fields::integer);
    f.optional_into("n_max", n_max, &Fields::integer);
    f.optional_into("paths", s.paths, &Fields::count);
    f.optional_into("target_space", s.target_space, &Fields::text);
    f.used("reference");
    if (f.has("reference")) {
        Fields r(doc.at("reference"), "study.reference");
        r.optional_into("kind", s.reference, &Fields::text);
        r.optional_into("fine_exponent", fine, &Fields::integer);
        r.finish();
    }
    f.finish();
    if (n_min < 1 || n_max < n_min || n_max > 20) Fields::fail("study.n_min", "range is invalid");
    if (fine <= n_max || fine > 24) {
        Fields::fail("study.reference.fine_exponent", "must exceed n_max and be at most 24");
    }
    if (!(s.T > 0.0)) Fields::fail("study.T", "must be positive");
    if (s.paths < 1) Fields::fail("study.paths", "must be positive");
    s.n_min = int(n_min);
    s.n_max = int(n_max);
    s.fine_exponent = int(fine);
    try {
        parse_reference(s.reference);
        parse_target(s.target_space);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("in 'study': ") + e.what());
    }
    return s;
}

MlmcBlock parse_mlmc(const json& doc) {
    Fields f(doc, "mlmc");
    MlmcBlock m;
    std::int64_t max_level = m.max_level, min_level = m.min_level;
    f.optional_into("refinement", m.refinement, &Fields::count);
    f.optional_into("max_level", max_level, &Fields::integer);
    f.optional_into("min_level", min_level, &Fields::integer);
    f.optional_into("pilot_paths", m.pilot_paths, &Fields::count);
    f.optional_into("T", m.T, &Fields::number);
    f.optional_into("replications", m.replications, &Fields::count);
    f.optional_into("reference_price", m.reference_price, &Fields::number);
    f.optional_into("path_ceiling", m.path_ceiling, &Fields::count);
    f.optional_into("selection", m.selection, &Fields::text);
    const json& eps = f.raw("epsilons");
    if (!eps.is_array()) Fields::fail("mlmc.epsilons", "expected an array");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!eps[i].is_number() || !(eps[i].get<double>() > 0.0)) {
            Fields::fail("mlmc.epsilons[" + std::to_string(i) + "]", "must be a positive number");
        }
        m.epsilons.push_back(eps[i].get<double>());
    }
    if (m.epsilons.empty()) Fields::fail("mlmc.epsilons", "must not be empty");
    f.used("payoff");
    if (f.has("payoff")) {
        Fields p(doc.at("payoff"), "mlmc.payoff");
        p.optional_into("kind", m.payoff, &Fields::text);
        p.optional_into("strike", m.strike, &Fields::number);
        p.finish();
    }
    f.finish();
    m.max_level = int(max_level);
    m.min_level = int(min_level);
    if (m.selection != "bias" && m.selection != "fixed") {
        Fields::fail("mlmc.selection", "must be 'bias' or 'fixed'");
    }
    try {
        parse_payoff(m.payoff);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("in 'mlmc.payoff': ") + e.what());
    }
    return m;
}

PriceBlock parse_price(const json& doc) {
    Fields f(doc, "price");
    PriceBlock p;
    f.optional_into("mode", p.mode, &Fields::text);
    f.optional_into("scheme", p.scheme, &Fields::text);
    f.optional_into("paths", p.paths, &Fields::count);
    f.optional_into("steps", p.steps, &Fields::count);
    f.optional_into("T", p.T, &Fields::number);
    f.used("payoff");
    if (f.has("payoff")) {
        Fields q(doc.at("payoff"), "price.payoff");
        q.optional_into("kind", p.payoff, &Fields::text);
        q.optional_into("strike", p.strike, &Fields::number);
        q.finish();
    }
    f.finish();
    if (p.mode != "closed-form" && p.mode != "mc" && p.mode != "exact") {
        Fields::fail("price.mode", "must be 'closed-form', 'mc' or 'exact'");
    }
    if (p.scheme != "modified" && p.scheme != "implicit") {
        Fields::fail("price.scheme", "must be 'modified' or 'implicit'");
    }
    if (p.steps < 1) Fields::fail("price.steps", "must be positive");
    if (p.paths < 2) Fields::fail("price.paths", "must be at least 2");
    try {
        parse_payoff(p.payoff);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("in 'price.payoff': ") + e.what());
    }
    return p;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json model_json(const ModelConfig& m) {
    json params = json::object();
    for (const auto& [k, v] : m.params) params[k] = v;
    return {{"family", m.family}, {"params", params}};
}

}  // namespace

Regularity parse_regime(const std::string& name) {
    if (name == "moments") return Regularity::MomentsOnly;
    if (name == "smooth") return Regularity::SmoothDrift;
    if (name == "smooth-const") return Regularity::SmoothDriftConstantDiffusion;
    throw ConfigError("unknown regime '" + name + "'");
}

ExperimentConfig parse_config(const json& doc) {
    Fields f(doc, "");
    ExperimentConfig cfg;
    cfg.model = parse_model(f.raw("model"), "model");
    f.used("second_model");
    if (f.has("second_model")) cfg.second_model = parse_model(doc.at("second_model"), "second_model");
    f.optional_into("correlation", cfg.correlation, &Fields::number);
    f.used("scheme");
    if (f.has("scheme")) cfg.scheme = parse_scheme(doc.at("scheme"));
    f.used("study");
    if (f.has("study")) cfg.study = parse_study(doc.at("study"));
    f.used("mlmc");
    if (f.has("mlmc")) cfg.mlmc = parse_mlmc(doc.at("mlmc"));
    f.used("price");
    if (f.has("price")) cfg.price = parse_price(doc.at("price"));
    f.used("seed");
    if (f.has("seed")) {
        const json& s = doc.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
            Fields::fail("seed", "expected a non-negative integer");
        }
        cfg.seed = s.get<std::uint64_t>();
    }
    std::size_t threads = cfg.threads;
    f.optional_into("threads", threads, &Fields::count);
    cfg.threads = unsigned(threads);
    f.optional_into("output", cfg.output, &Fields::text);
    f.finish();
    if (!(std::abs(cfg.correlation) <= 1.0)) Fields::fail("correlation", "must lie in [-1, 1]");
    return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

json to_json(const ExperimentConfig& c) {
    json out;
    out["model"] = model_json(c.model);
    if (c.second_model) out["second_model"] = model_json(*c.second_model);
    out["correlation"] = c.correlation;
    const SchemeConfig& s = c.scheme;
    out["scheme"] = {{"variant", s.variant},     {"k", optional_number(s.k)},
                     {"k_prime", optional_number(s.k_prime)},
                     {"scale_lo", s.scale_lo},   {"scale_hi", s.scale_hi},
                     {"readout", s.readout},     {"regime", s.regime},
                     {"q", optional_number(s.q)}, {"q_prime", optional_number(s.q_prime)},
                     {"symmetric", s.symmetric}};
    if (c.study) {
        const StudyConfig& st = *c.study;
        out["study"] = {{"T", st.T},
                        {"n_min", st.n_min},
                        {"n_max", st.n_max},
                        {"paths", st.paths},
                        {"reference", {{"kind", st.reference}, {"fine_exponent", st.fine_exponent}}},
                        {"target_space", st.target_space}};
    }
    if (c.mlmc) {
        const MlmcBlock& m = *c.mlmc;
        out["mlmc"] = {{"refinement", m.refinement},
                       {"max_level", m.max_level},
                       {"min_level", m.min_level},
                       {"epsilons", m.epsilons},
                       {"pilot_paths", m.pilot_paths},
                       {"payoff", {{"kind", m.payoff}, {"strike", m.strike}}},
                       {"T", m.T},
                       {"replications", m.replications},
                       {"reference_price", optional_number(m.reference_price)},
                       {"path_ceiling", m.path_ceiling},
                       {"selection", m.selection}};
    }
    if (c.price) {
        const PriceBlock& p = *c.price;
        out["price"] = {{"mode", p.mode},
                        {"scheme", p.scheme},
                        {"paths", p.paths},
                        {"steps", p.steps},
                        {"payoff", {{"kind", p.payoff}, {"strike", p.strike}}},
                        {"T", p.T}};
    }
    out["seed"] = c.seed;
    out["threads"] = c.threads;
    out["output"] = c.output;
    return out;
}

json to_json(const ProjectionPlan& plan) {
    return {{"k", optional_number(plan.k)},
            {"k_prime", optional_number(plan.k_prime)},
            {"scale_lo", plan.scale_lo},
            {"scale_hi", plan.scale_hi},
            {"rate", optional_number(plan.rate)},
            {"q", optional_number(plan.q)},
            {"q_prime", optional_number(plan.q_prime)},
            {"regime", to_string(plan.regime)},
            {"symmetric", plan.symmetric}};
}

ProjectionPlan build_plan(const TransformedModel& model, const SchemeConfig& scheme) {
    ProjectionPlan plan;
    if (scheme.k || scheme.k_prime) {
        plan = manual_plan(model, scheme.k, scheme.k_prime, scheme.scale_lo, scheme.scale_hi);
    } else {
        plan = scheme.regime == "auto"
                   ? plan_best(model)
                   : plan_exponents(model, parse_regime(scheme.regime), scheme.q, scheme.q_prime);
        if (!(scheme.scale_lo > 0.0) || !(scheme.scale_hi > 0.0)) {
            throw PlanInfeasible("projection scale factors must be positive");
        }
        plan.scale_lo = scheme.scale_lo;
        plan.scale_hi = scheme.scale_hi;
    }
    plan.symmetric = scheme.symmetric;
    return plan;
}

std::vector<MlmcFactor> build_factors(const ExperimentConfig& cfg) {
    std::vector<MlmcFactor> factors;
    ModelBundle first = make_model(cfg.model.family, cfg.model.params);
    ProjectionPlan plan = build_plan(first.transformed, cfg.scheme);
    factors.push_back({std::move(first), plan});
    if (cfg.second_model) {
        ModelBundle second = make_model(cfg.second_model->family, cfg.second_model->params);
        ProjectionPlan plan2 = build_plan(second.transformed, cfg.scheme);
        factors.push_back({std::move(second), plan2});
    }
    return factors;
}

StudySpec make_study_spec(const ExperimentConfig& cfg) {
    if (!cfg.study) throw ConfigError("config field 'study' is required for convergence");
    const StudyConfig& st = *cfg.study;
    StudySpec spec;
    spec.T = st.T;
    spec.n_min = st.n_min;
    spec.n_max = st.n_max;
    spec.paths = st.paths;
    spec.reference = parse_reference(st.reference);
    spec.fine_exponent = st.fine_exponent;
    spec.variant = parse_variant(cfg.scheme.variant);
    spec.readout = parse_readout(cfg.scheme.readout);
    spec.target = parse_target(st.target_space);
    spec.threads = cfg.threads;
    return spec;
}

MlmcConfig make_mlmc_config(const ExperimentConfig& cfg) {
    if (!cfg.mlmc) throw ConfigError("config field 'mlmc' is required for mlmc");
    const MlmcBlock& m = *cfg.mlmc;
    MlmcConfig mc;
    mc.refinement = m.refinement;
    mc.max_level = m.max_level;
    mc.min_level = m.min_level;
    mc.pilot_paths = m.pilot_paths;
    mc.payoff = {parse_payoff(m.payoff), m.strike};
    mc.correlation = cfg.correlation;
    mc.T = m.T;
    mc.path_ceiling = m.path_ceiling;
    mc.selection = m.selection == "fixed" ? LevelSelection::Fixed : LevelSelection::Bias;
    mc.threads = cfg.threads;
    return mc;
}

}  // namespace projem
