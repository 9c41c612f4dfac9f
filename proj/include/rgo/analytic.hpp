#pragma once

#include "rgo/growth_types.hpp"

#include <limits>
#include <utility>

namespace rgo {
namespace analytic {

// u = sqrt(pc), phi = log(pc), lambda = (1/8) integral of ((pc)'/(pc))^2 c p.
// Interval domains only; throws AssumptionViolated when the diagnostics fail.
std::pair<GeneratingFunction, GrowthReport> solve_one_dim(const MarketModel& model);

// Requires c^{-1} div c = grad H; returns phi = log p + H. On the simplex the
// consistency check uses the ambient identity c grad H = div c (which is how
// the boundary covariance is built); the closed form is kept diagnostic there
// and the variational route stays authoritative.
std::pair<GeneratingFunction, GrowthReport> solve_gradient_case(const MarketModel& model,
                                                                ScalarFieldPtr h);

// Growth lower bound -integral (L^c u / u) p for a candidate u in D.
// Returns +infinity when the negative part diverges across the exhaustion.
double candidate_growth(const MarketModel& model, const ScalarField& u);

struct ClassifyOptions {
    int quadrature_levels = 0;
    int grid_level = 0;            // variational fallback resolution (0 = default)
    bool run_empirical_check = true;  // simulate the reversing diffusion in d >= 2
};

GrowthReport classify(const MarketModel& model, const ClassifyOptions& opts = {});

}  // namespace analytic
}  // namespace rgo
