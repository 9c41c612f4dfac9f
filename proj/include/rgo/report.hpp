#pragma once

#include "rgo/growth_types.hpp"
#include "rgo/simulate.hpp"

#include <json.hpp>

namespace rgo {

using nlohmann::json;

json to_json(const Diagnostics& diag);
json to_json(const GrowthReport& report);
json to_json(const simulate::WealthSeries& series);
json to_json(const simulate::OccupancyHistogram& hist);

void write_json(const std::string& path, const json& j);

}  // namespace rgo
