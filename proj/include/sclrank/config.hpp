#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "errors.hpp"
#include "trainer.hpp"

namespace sclrank {

namespace detail {

template <typename T>
void read_field(nlohmann::json const& j, char const* key, T& out)
{
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (nlohmann::json::exception const& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

inline void reject_unknown(nlohmann::json const& j, std::set<std::string> const& known,
                           std::string const& where)
{
    if (!j.is_object()) throw ConfigError("config field '" + where + "' must be an object");
    for (auto const& [k, v] : j.items()) {
        if (!known.contains(k)) throw ConfigError("unknown " + where + " config key '" + k + "'");
    }
}

} // namespace detail

/// Overlay the keys present in `j` onto `cfg`. Unknown keys are rejected.
///
/// Recognized layout (all keys optional):
/// { "batch_size", "epochs", "learning_rate", "adam_beta1", "adam_beta2",
///   "adam_eps", "seed", "augment", "validation_metric",
///   "loss": {"base", "tau", "lambda", "margin", "clip_eps", "scl_enabled"},
///   "encoder": {"hashed_dim", "hidden", "rep_dim", "max_tokens",
///               "normalize_phi", "init_seed", "init_scale"},
///   "selector": {"strategy", "summary_size", "bm25_k1", "bm25_b", "seed"} }
inline void apply_train_config(nlohmann::json const& j, TrainConfig& cfg)
{
    static const std::set<std::string> top{"batch_size", "epochs",   "learning_rate",
                                           "adam_beta1", "adam_beta2", "adam_eps",
                                           "seed",       "augment",  "validation_metric",
                                           "loss",       "encoder",  "selector"};
    detail::reject_unknown(j, top, "training");
    detail::read_field(j, "batch_size", cfg.batch_size);
    detail::read_field(j, "epochs", cfg.epochs);
    detail::read_field(j, "learning_rate", cfg.adam.learning_rate);
    detail::read_field(j, "adam_beta1", cfg.adam.beta1);
    detail::read_field(j, "adam_beta2", cfg.adam.beta2);
    detail::read_field(j, "adam_eps", cfg.adam.eps);
    detail::read_field(j, "seed", cfg.seed);
    detail::read_field(j, "augment", cfg.augment);
    if (j.contains("validation_metric")) {
        std::string name;
        detail::read_field(j, "validation_metric", name);
        cfg.validation_metric = parse_metric(name);
    }
    if (j.contains("loss")) {
        auto const& l = j["loss"];
        detail::reject_unknown(l, {"base", "tau", "lambda", "margin", "clip_eps", "scl_enabled"},
                               "loss");
        if (l.contains("base")) {
            std::string name;
            detail::read_field(l, "base", name);
            cfg.loss.base = parse_ranking_loss(name);
        }
        detail::read_field(l, "tau", cfg.loss.tau);
        detail::read_field(l, "lambda", cfg.loss.lambda);
        detail::read_field(l, "margin", cfg.loss.margin);
        detail::read_field(l, "clip_eps", cfg.loss.clip_eps);
        detail::read_field(l, "scl_enabled", cfg.loss.scl_enabled);
    }
    if (j.contains("encoder")) {
        auto const& e = j["encoder"];
        detail::reject_unknown(e, {"hashed_dim", "hidden", "rep_dim", "max_tokens", "normalize_phi",
                                   "init_seed", "init_scale"},
                               "encoder");
        detail::read_field(e, "hashed_dim", cfg.encoder.hashed_dim);
        detail::read_field(e, "hidden", cfg.encoder.hidden);
        detail::read_field(e, "rep_dim", cfg.encoder.rep_dim);
        detail::read_field(e, "max_tokens", cfg.encoder.max_tokens);
        detail::read_field(e, "normalize_phi", cfg.encoder.normalize_phi);
        detail::read_field(e, "init_seed", cfg.encoder.init_seed);
        detail::read_field(e, "init_scale", cfg.encoder.init_scale);
    }
    if (j.contains("selector")) {
        auto const& s = j["selector"];
        detail::reject_unknown(s, {"strategy", "summary_size", "bm25_k1", "bm25_b", "seed"},
                               "selector");
        if (s.contains("strategy")) {
            std::string name;
            detail::read_field(s, "strategy", name);
            cfg.selector.strategy = parse_selector_strategy(name);
        }
        detail::read_field(s, "summary_size", cfg.selector.summary_size);
        detail::read_field(s, "bm25_k1", cfg.selector.bm25_k1);
        detail::read_field(s, "bm25_b", cfg.selector.bm25_b);
        detail::read_field(s, "seed", cfg.selector.seed);
    }
}

inline nlohmann::json to_json(TrainConfig const& cfg)
{
    return {{"batch_size", cfg.batch_size},
            {"epochs", cfg.epochs},
            {"learning_rate", cfg.adam.learning_rate},
            {"adam_beta1", cfg.adam.beta1},
            {"adam_beta2", cfg.adam.beta2},
            {"adam_eps", cfg.adam.eps},
            {"seed", cfg.seed},
            {"augment", cfg.augment},
            {"validation_metric", to_string(cfg.validation_metric)},
            {"loss",
             {{"base", to_string(cfg.loss.base)},
              {"tau", cfg.loss.tau},
              {"lambda", cfg.loss.lambda},
              {"margin", cfg.loss.margin},
              {"clip_eps", cfg.loss.clip_eps},
              {"scl_enabled", cfg.loss.scl_enabled}}},
            {"encoder",
             {{"hashed_dim", cfg.encoder.hashed_dim},
              {"hidden", cfg.encoder.hidden},
              {"rep_dim", cfg.encoder.rep_dim},
              {"max_tokens", cfg.encoder.max_tokens},
              {"normalize_phi", cfg.encoder.normalize_phi},
              {"init_seed", cfg.encoder.init_seed},
              {"init_scale", cfg.encoder.init_scale}}},
            {"selector",
             {{"strategy", to_string(cfg.selector.strategy)},
              {"summary_size", cfg.selector.summary_size},
              {"bm25_k1", cfg.selector.bm25_k1},
              {"bm25_b", cfg.selector.bm25_b},
              {"seed", cfg.selector.seed}}}};
}

inline nlohmann::json load_json(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (nlohmann::json::parse_error const& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

} // namespace sclrank
