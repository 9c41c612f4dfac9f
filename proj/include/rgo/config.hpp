#pragma once

#include "rgo/model.hpp"
#include "rgo/rank.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace rgo {

using nlohmann::json;

struct RankSetup {
    rank::RankInputs raw_inputs;   // before any boundary modification
    rank::RankInputs inputs;       // what the pipeline consumes
    rank::ThetaParams params;
    std::optional<rank::CutoffSpec> cutoff;
};

struct Expectations {
    std::optional<std::string> classification;
    std::optional<double> lambda;
};

struct LoadedModel {
    MarketModel model;
    ScalarFieldPtr gradient_h;  // closed-form H when the preset is a gradient case
    std::optional<RankSetup> rank_setup;
    Expectations expected;
    std::string name;
    json raw;
};

LoadedModel build_model(const json& config);
LoadedModel load_model_file(const std::string& path);

// Minimal structural JSON-schema check (type / required / properties / items /
// enum); enough to guarantee the documented shapes round-trip.
void validate_against_schema(const json& doc, const json& schema, const std::string& where = "$");

}  // namespace rgo
