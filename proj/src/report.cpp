#include "rgo/report.hpp"

#include <fstream>

namespace rgo {

namespace {

json to_json(const SeriesDiagnostic& s) {
    return json{{"pass", s.pass},
                {"divergent", s.divergent},
                {"value", s.value},
                {"totals", s.totals}};
}

const char* reversing_kind(const ReversingDiagnostic& r) {
    switch (r.kind) {
        case ReversingDiagnostic::Kind::exact_1d: return "exact";
        case ReversingDiagnostic::Kind::empirical: return "empirical";
        case ReversingDiagnostic::Kind::unknown: return "unknown";
    }
    return "?";
}

}  // namespace

json to_json(const Diagnostics& diag) {
    json r{{"kind", reversing_kind(diag.reversing)}, {"pass", diag.reversing.pass}};
    if (diag.reversing.lower_infinite) r["lower_infinite"] = *diag.reversing.lower_infinite;
    if (diag.reversing.upper_infinite) r["upper_infinite"] = *diag.reversing.upper_infinite;
    if (!diag.reversing.note.empty()) r["note"] = diag.reversing.note;
    return json{{"energy_integral", to_json(diag.energy)},
                {"flux_positive_part", to_json(diag.flux_part)},
                {"reversing", r}};
}

json to_json(const GrowthReport& report) {
    json j{{"classification", to_string(report.classification)},
           {"method", report.method},
           {"diagnostics", to_json(report.diagnostics)}};
    if (report.lambda)
        j["lambda"] = *report.lambda;
    else
        j["lambda"] = nullptr;
    if (!report.notes.empty()) j["notes"] = report.notes;
    return j;
}

json to_json(const simulate::WealthSeries& series) {
    return json{{"growth_per_path", series.growth_estimate},
                {"pooled_growth", series.pooled_growth},
                {"ci_half_width", series.ci_half_width},
                {"n_batches", series.n_batches},
                {"max_terminal_gap", series.max_terminal_gap}};
}

json to_json(const simulate::OccupancyHistogram& hist) {
    return json{{"tv_distance", hist.tv_distance},
                {"bins_per_axis", hist.bins_per_axis},
                {"outside_empirical", hist.outside_empirical},
                {"outside_reference", hist.outside_reference}};
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

}  // namespace rgo
