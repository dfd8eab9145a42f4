#include "spear/model.hpp"

namespace spear {

const char* to_string(Aggregation agg) {
    return agg == Aggregation::Mean ? "mean" : "max";
}

Aggregation aggregation_from_string(const std::string& name) {
    if (name == "mean") return Aggregation::Mean;
    if (name == "max") return Aggregation::Max;
    throw ConfigError("aggregation must be 'mean' or 'max', got '" + name + "'");
}

void ModelConfig::validate() const {
    if (d_model < 1) throw ConfigError("model: d_model must be >= 1");
    if (n_layers < 0) throw ConfigError("model: n_layers must be >= 0");
    if (n_heads < 1) throw ConfigError("model: n_heads must be >= 1");
    if (d_model % n_heads != 0)
        throw ConfigError("model: d_model (" + std::to_string(d_model) +
                          ") must be divisible by n_heads (" + std::to_string(n_heads) + ")");
    if (d_ff < 1) throw ConfigError("model: d_ff must be >= 1");
    if (n_bins < 2) throw ConfigError("model: n_bins must be >= 2");
    if (prompt_len < 1) throw ConfigError("model: prompt_len must be >= 1");
    if (max_seq_len < prompt_len + 1)
        throw ConfigError("model: max_seq_len must be >= prompt_len + 1");
}

nlohmann::json ModelConfig::to_json() const {
    // plain nlohmann::json sorts keys: this is the canonical form embedded in
    // checkpoints.
    nlohmann::json j;
    j["aggregation"] = to_string(aggregation);
    j["d_ff"] = d_ff;
    j["d_model"] = d_model;
    j["max_seq_len"] = max_seq_len;
    j["n_bins"] = n_bins;
    j["n_heads"] = n_heads;
    j["n_layers"] = n_layers;
    j["prompt_len"] = prompt_len;
    j["seed"] = seed;
    return j;
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.aggregation = aggregation_from_string(j.at("aggregation").get<std::string>());
    c.d_ff = j.at("d_ff").get<int>();
    c.d_model = j.at("d_model").get<int>();
    c.max_seq_len = j.at("max_seq_len").get<int>();
    c.n_bins = j.at("n_bins").get<int>();
    c.n_heads = j.at("n_heads").get<int>();
    c.n_layers = j.at("n_layers").get<int>();
    c.prompt_len = j.at("prompt_len").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.validate();
    return c;
}

}  // namespace spear
