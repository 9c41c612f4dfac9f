#pragma once

#include "rgo/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rgo {

// One exhaustion-wise integral with its convergence verdict.
struct SeriesDiagnostic {
    bool pass = false;       // integral converged (assumption satisfied)
    bool divergent = false;  // increments refuse to decay (assumption violated)
    double value = 0;        // integral over the deepest truncation used
    std::vector<double> totals;
};

// Assumption (iii): non-explosion of the reversing diffusion.
struct ReversingDiagnostic {
    enum class Kind { exact_1d, empirical, unknown };
    Kind kind = Kind::unknown;
    bool pass = false;
    // 1-D: scale-measure integrals toward each endpoint; finite on either
    // side means the assumption fails.
    std::optional<bool> lower_infinite, upper_infinite;
    std::string note;
};

struct Diagnostics {
    SeriesDiagnostic energy;     // (i)  integral of ell' c ell p
    SeriesDiagnostic flux_part;  // (ii) integral of (div(p c ell))^+
    ReversingDiagnostic reversing;

    bool all_pass() const { return energy.pass && flux_part.pass && reversing.pass; }
};

struct CheckOptions {
    int levels = 0;       // 0 = use the domain's bundled exhaustion depth
    double rel_tol = 1e-7;
    double cap = 1e6;
    bool skip_reversing = false;  // callers in d >= 2 fill the empirical part themselves
};

// Quadrature values over successive truncations E_n for items (i) and (ii),
// plus the exact endpoint criterion for (iii) in one dimension. In d >= 2
// the reversing item is returned as "unknown" unless a caller able to
// simulate fills it in (see analytic::classify).
Diagnostics check_assumptions(const MarketModel& model, const CheckOptions& opts = {});

// Exhaustion-wise cumulative integrals of an ambient-coordinate integrand.
std::vector<double> exhaustion_totals(const MarketModel& model, const FnV& f, int levels);

// 1-D only: cumulative integrals of f from the moving endpoint toward a fixed
// interior anchor; used for the scale-measure test of assumption (iii).
std::vector<double> endpoint_totals(const MarketModel& model, const Fn1& f, bool lower,
                                    int levels);

// div(p c ell) = tr(c D^2 p) + 2 (div c)' grad p + p * divdiv(c).
double divergence_pcell(const MarketModel& model, const Vec& x);

}  // namespace rgo
