#pragma once

// JSON analysis configuration.
//
//   {
//     "risk_factors": {"count": 2, "qubits_per_factor": 2, "bound_sigmas": 3.0},
//     "assets": [{"lgd": 1000.5, "p0": 0.15, "rho": 0.1, "alphas": [0.35, 0.2]}, ...],
//     "analysis": {"alpha": 0.95, "epsilon": 0.002, "confidence": 0.99,
//                  "shots_per_round": 100, "max_rounds": 64, "seed": 0,
//                  "variant": "multi_rotation", "encoding": "linear",
//                  "estimator": "iqae", "mode": "s_free", "mc_paths": 1000000}
//   }
//
// Unknown keys are rejected. All problems are collected and reported
// together, each prefixed with its field path.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "qcra/estimation.hpp"
#include "qcra/gaussian.hpp"
#include "qcra/objective.hpp"
#include "qcra/risk.hpp"
#include "qcra/uncertainty.hpp"

namespace qcra {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors)
        : std::runtime_error(join(errors)), errors_(std::move(errors)) {}

    const std::vector<std::string>& errors() const { return errors_; }

private:
    static std::string join(const std::vector<std::string>& errors) {
        std::string s = "invalid config:";
        for (const auto& e : errors) {
            s += "\n  " + e;
        }
        return s;
    }
    std::vector<std::string> errors_;
};

enum class EstimatorKind { Exact, Iqae, Classical };

inline std::string to_string(EstimatorKind e) {
    switch (e) {
    case EstimatorKind::Exact: return "exact";
    case EstimatorKind::Iqae: return "iqae";
    case EstimatorKind::Classical: return "classical";
    }
    return "unknown";
}

inline std::optional<EstimatorKind> parse_estimator(const std::string& s) {
    if (s == "exact") return EstimatorKind::Exact;
    if (s == "iqae") return EstimatorKind::Iqae;
    if (s == "classical") return EstimatorKind::Classical;
    return std::nullopt;
}

inline std::optional<ModelVariant> parse_variant(const std::string& s) {
    if (s == "multi_rotation") return ModelVariant::MultiRotation;
    if (s == "single_rotation") return ModelVariant::SingleRotation;
    if (s == "single_factor") return ModelVariant::SingleFactor;
    return std::nullopt;
}

inline std::optional<Encoding> parse_encoding(const std::string& s) {
    if (s == "exact") return Encoding::Exact;
    if (s == "linear") return Encoding::Linear;
    return std::nullopt;
}

inline std::optional<ObjectiveMode> parse_mode(const std::string& s) {
    if (s == "s_free") return ObjectiveMode::SFree;
    if (s == "weighted_sum") return ObjectiveMode::WeightedSum;
    return std::nullopt;
}

struct AnalysisConfig {
    int num_factors = 1;
    int qubits_per_factor = 2;
    double bound_sigmas = kDefaultBoundSigmas;
    std::vector<Asset> assets;

    double alpha = 0.95;
    std::optional<double> epsilon;
    std::optional<double> confidence;
    std::uint64_t shots_per_round = 100;
    int max_rounds = 64;
    std::uint64_t seed = 0;
    ModelVariant variant = ModelVariant::MultiRotation;
    Encoding encoding = Encoding::Linear;
    EstimatorKind estimator = EstimatorKind::Iqae;
    ObjectiveMode mode = ObjectiveMode::SFree;
    std::uint64_t mc_paths = 1'000'000;

    Portfolio portfolio() const { return {assets, num_factors}; }

    std::vector<FactorGrid> grids() const {
        return std::vector<FactorGrid>(static_cast<std::size_t>(num_factors),
                                       discretize_normal(qubits_per_factor, 0.0, 1.0, bound_sigmas));
    }

    PipelineOptions pipeline() const { return {variant, encoding, mode}; }

    IqaeConfig iqae_config() const {
        if (!epsilon || !confidence) {
            throw ConfigError({"analysis: epsilon and confidence are required for the iqae estimator"});
        }
        IqaeConfig c;
        c.epsilon = *epsilon;
        c.confidence = *confidence;
        c.shots_per_round = shots_per_round;
        c.max_rounds = max_rounds;
        c.seed = seed;
        return c;
    }

    /// Checks cross-field constraints that overrides can break.
    void validate() const {
        std::vector<std::string> errs;
        if (variant == ModelVariant::SingleFactor && num_factors != 1) {
            errs.push_back("analysis.variant: single_factor requires risk_factors.count = 1");
        }
        if (variant == ModelVariant::SingleRotation) {
            for (std::size_t k = 1; k < assets.size(); ++k) {
                if (assets[k].alphas != assets[0].alphas) {
                    errs.push_back("assets[" + std::to_string(k) +
                                   "].alphas: single_rotation requires every asset to share "
                                   "the weights of assets[0]");
                }
            }
        }
        if (estimator == EstimatorKind::Iqae && (!epsilon || !confidence)) {
            errs.push_back("analysis: epsilon and confidence are required for the iqae estimator");
        }
        if (!errs.empty()) {
            throw ConfigError(std::move(errs));
        }
    }

    /// Resolved configuration, defaults filled in.
    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["risk_factors"] = {{"count", num_factors},
                             {"qubits_per_factor", qubits_per_factor},
                             {"bound_sigmas", bound_sigmas}};
        j["assets"] = nlohmann::ordered_json::array();
        for (const auto& a : assets) {
            j["assets"].push_back(
                {{"lgd", a.lgd}, {"p0", a.p0}, {"rho", a.rho}, {"alphas", a.alphas}});
        }
        nlohmann::ordered_json an;
        an["alpha"] = alpha;
        an["epsilon"] = epsilon ? nlohmann::ordered_json(*epsilon) : nlohmann::ordered_json();
        an["confidence"] =
            confidence ? nlohmann::ordered_json(*confidence) : nlohmann::ordered_json();
        an["shots_per_round"] = shots_per_round;
        an["max_rounds"] = max_rounds;
        an["seed"] = seed;
        an["variant"] = to_string(variant);
        an["encoding"] = to_string(encoding);
        an["estimator"] = to_string(estimator);
        an["mode"] = to_string(mode);
        an["mc_paths"] = mc_paths;
        j["analysis"] = an;
        return j;
    }
};

namespace detail {

class FieldReader {
public:
    explicit FieldReader(std::vector<std::string>& errors) : errors_(errors) {}

    void unknown_keys(const nlohmann::json& obj, const std::string& path,
                      std::initializer_list<const char*> known) {
        for (const auto& [key, _] : obj.items()) {
            bool found = false;
            for (const char* k : known) {
                found = found || key == k;
            }
            if (!found) {
                errors_.push_back(join(path, key) + ": unknown field");
            }
        }
    }

    std::optional<double> number(const nlohmann::json& obj, const std::string& path,
                                 const char* key, bool required) {
        const std::string p = join(path, key);
        if (!obj.contains(key)) {
            if (required) {
                errors_.push_back(p + ": required field missing");
            }
            return std::nullopt;
        }
        const auto& v = obj.at(key);
        if (!v.is_number()) {
            errors_.push_back(p + ": expected a number");
            return std::nullopt;
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            errors_.push_back(p + ": must be finite");
            return std::nullopt;
        }
        return d;
    }

    std::optional<std::int64_t> integer(const nlohmann::json& obj, const std::string& path,
                                        const char* key, bool required) {
        const std::string p = join(path, key);
        if (!obj.contains(key)) {
            if (required) {
                errors_.push_back(p + ": required field missing");
            }
            return std::nullopt;
        }
        const auto& v = obj.at(key);
        if (!v.is_number_integer()) {
            errors_.push_back(p + ": expected an integer");
            return std::nullopt;
        }
        return v.get<std::int64_t>();
    }

    std::optional<std::string> string(const nlohmann::json& obj, const std::string& path,
                                      const char* key) {
        if (!obj.contains(key)) {
            return std::nullopt;
        }
        const auto& v = obj.at(key);
        if (!v.is_string()) {
            errors_.push_back(join(path, key) + ": expected a string");
            return std::nullopt;
        }
        return v.get<std::string>();
    }

    void error(const std::string& path, const std::string& msg) {
        errors_.push_back(path + ": " + msg);
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }

private:
    std::vector<std::string>& errors_;
};

} // namespace detail

/// Parses and validates a configuration document; throws ConfigError listing
/// every problem found.
inline AnalysisConfig parse_config(const nlohmann::json& doc) {
    std::vector<std::string> errs;
    detail::FieldReader rd(errs);
    AnalysisConfig cfg;
    if (!doc.is_object()) {
        throw ConfigError({"<root>: expected a JSON object"});
    }
    rd.unknown_keys(doc, "", {"risk_factors", "assets", "analysis"});

    if (!doc.contains("risk_factors") || !doc["risk_factors"].is_object()) {
        rd.error("risk_factors", "required object missing");
    } else {
        const auto& rf = doc["risk_factors"];
        rd.unknown_keys(rf, "risk_factors", {"count", "qubits_per_factor", "bound_sigmas"});
        if (auto v = rd.integer(rf, "risk_factors", "count", true)) {
            if (*v < 1 || *v > 8) {
                rd.error("risk_factors.count", "must be between 1 and 8");
            } else {
                cfg.num_factors = static_cast<int>(*v);
            }
        }
        if (auto v = rd.integer(rf, "risk_factors", "qubits_per_factor", true)) {
            if (*v < 1 || *v > 10) {
                rd.error("risk_factors.qubits_per_factor", "must be between 1 and 10");
            } else {
                cfg.qubits_per_factor = static_cast<int>(*v);
            }
        }
        if (auto v = rd.number(rf, "risk_factors", "bound_sigmas", false)) {
            if (!(*v > 0.0)) {
                rd.error("risk_factors.bound_sigmas", "must be positive");
            } else {
                cfg.bound_sigmas = *v;
            }
        }
    }

    if (!doc.contains("assets") || !doc["assets"].is_array() || doc["assets"].empty()) {
        rd.error("assets", "required non-empty array missing");
    } else {
        const auto& arr = doc["assets"];
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string path = "assets[" + std::to_string(k) + "]";
            const auto& a = arr[k];
            if (!a.is_object()) {
                rd.error(path, "expected an object");
                continue;
            }
            rd.unknown_keys(a, path, {"lgd", "p0", "rho", "alphas"});
            Asset asset;
            if (auto v = rd.number(a, path, "lgd", true)) {
                if (*v < 0.0) {
                    rd.error(path + ".lgd", "must be nonnegative");
                }
                asset.lgd = *v;
            }
            if (auto v = rd.number(a, path, "p0", true)) {
                if (!(*v > 0.0 && *v < 1.0)) {
                    rd.error(path + ".p0", "must lie in (0,1)");
                }
                asset.p0 = *v;
            }
            if (auto v = rd.number(a, path, "rho", true)) {
                if (!(*v >= 0.0 && *v < 1.0)) {
                    rd.error(path + ".rho", "must lie in [0,1)");
                }
                asset.rho = *v;
            }
            if (!a.contains("alphas") || !a["alphas"].is_array()) {
                rd.error(path + ".alphas", "required array missing");
            } else {
                const auto& w = a["alphas"];
                for (std::size_t i = 0; i < w.size(); ++i) {
                    if (!w[i].is_number()) {
                        rd.error(path + ".alphas[" + std::to_string(i) + "]", "expected a number");
                    } else {
                        asset.alphas.push_back(w[i].get<double>());
                    }
                }
                if (w.size() != static_cast<std::size_t>(cfg.num_factors)) {
                    rd.error(path + ".alphas", "expected " + std::to_string(cfg.num_factors) +
                                                   " weights (risk_factors.count), got " +
                                                   std::to_string(w.size()));
                }
            }
            cfg.assets.push_back(std::move(asset));
        }
        if (arr.size() > 16) {
            rd.error("assets", "at most 16 assets are supported");
        }
    }

    if (!doc.contains("analysis") || !doc["analysis"].is_object()) {
        rd.error("analysis", "required object missing");
    } else {
        const auto& an = doc["analysis"];
        const std::string p = "analysis";
        rd.unknown_keys(an, p,
                        {"alpha", "epsilon", "confidence", "shots_per_round", "max_rounds", "seed",
                         "variant", "encoding", "estimator", "mode", "mc_paths"});
        if (auto v = rd.number(an, p, "alpha", true)) {
            if (!(*v > 0.0 && *v < 1.0)) {
                rd.error("analysis.alpha", "must lie in (0,1)");
            }
            cfg.alpha = *v;
        }
        if (auto v = rd.number(an, p, "epsilon", false)) {
            if (!(*v > 0.0 && *v < 0.5)) {
                rd.error("analysis.epsilon", "must lie in (0,0.5)");
            }
            cfg.epsilon = *v;
        }
        if (auto v = rd.number(an, p, "confidence", false)) {
            if (!(*v > 0.0 && *v < 1.0)) {
                rd.error("analysis.confidence", "must lie in (0,1)");
            }
            cfg.confidence = *v;
        }
        if (auto v = rd.integer(an, p, "shots_per_round", false)) {
            if (*v < 1) {
                rd.error("analysis.shots_per_round", "must be positive");
            } else {
                cfg.shots_per_round = static_cast<std::uint64_t>(*v);
            }
        }
        if (auto v = rd.integer(an, p, "max_rounds", false)) {
            if (*v < 1 || *v > 10000) {
                rd.error("analysis.max_rounds", "must be between 1 and 10000");
            } else {
                cfg.max_rounds = static_cast<int>(*v);
            }
        }
        if (auto v = rd.integer(an, p, "seed", false)) {
            if (*v < 0) {
                rd.error("analysis.seed", "must be nonnegative");
            } else {
                cfg.seed = static_cast<std::uint64_t>(*v);
            }
        }
        if (auto v = rd.integer(an, p, "mc_paths", false)) {
            if (*v < 1) {
                rd.error("analysis.mc_paths", "must be positive");
            } else {
                cfg.mc_paths = static_cast<std::uint64_t>(*v);
            }
        }
        if (auto s = rd.string(an, p, "variant")) {
            if (auto v = parse_variant(*s)) {
                cfg.variant = *v;
            } else {
                rd.error("analysis.variant", "unknown variant '" + *s + "'");
            }
        }
        if (auto s = rd.string(an, p, "encoding")) {
            if (auto v = parse_encoding(*s)) {
                cfg.encoding = *v;
            } else {
                rd.error("analysis.encoding", "unknown encoding '" + *s + "'");
            }
        }
        if (auto s = rd.string(an, p, "estimator")) {
            if (auto v = parse_estimator(*s)) {
                cfg.estimator = *v;
            } else {
                rd.error("analysis.estimator", "unknown estimator '" + *s + "'");
            }
        }
        if (auto s = rd.string(an, p, "mode")) {
            if (auto v = parse_mode(*s)) {
                cfg.mode = *v;
            } else {
                rd.error("analysis.mode", "unknown mode '" + *s + "'");
            }
        }
    }
    if (!errs.empty()) {
        throw ConfigError(std::move(errs));
    }
    return cfg;
}

inline AnalysisConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError({path + ": cannot open config file"});
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({path + ": " + e.what()});
    }
    return parse_config(doc);
}

} // namespace qcra
