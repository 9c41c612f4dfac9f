#pragma once

#include "rgo/growth_types.hpp"
#include "rgo/model.hpp"
#include "rgo/rng.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rgo {
namespace simulate {

// Euler-Maruyama specification. The guard index names the exhaustion element
// whose exit aborts a path (exits are data: they witness explosion).
struct SdeSpec {
    VectorFieldPtr drift;
    CovarianceFieldPtr dispersion_of;  // sigma = dispersion_of->sqrt(x)
    Vec x0;
    double dt = 1e-3;
    double horizon = 2000.0;
    uint64_t seed = 42;
    int guard_level = 1;
    // Simplex handling: project the noise onto the zero-sum tangent space and
    // renormalize the state back onto sum x = 1 each step.
    bool simplex_mode = false;
    // Store every k-th state (k = store_stride); wealth and occupancy walk the
    // stored sequence, so the default keeps full resolution.
    int store_stride = 1;
    std::optional<Vec> domain_lo, domain_hi;  // guard bounds (filled from model)
};

struct Path {
    std::vector<double> states;  // flattened, (n_stored) x dim
    bool exploded = false;
    double exit_time = 0;
    int dim = 1;
    int n_stored() const { return int(states.size()) / dim; }
    Vec at(int k) const {
        Vec v(dim);
        for (int i = 0; i < dim; ++i) v[i] = states[size_t(k) * dim + i];
        return v;
    }
};

struct PathBundle {
    std::vector<Path> paths;
    double dt = 0, horizon = 0;
    uint64_t seed = 0;
    int dim = 1;
    int store_stride = 1;
    double stored_dt() const { return dt * store_stride; }
    int n_exploded() const {
        int k = 0;
        for (const auto& p : paths) k += p.exploded;
        return k;
    }
};

// drift of the worst-case diffusion: (1/2) c grad(phi) = c grad(u)/u
VectorFieldPtr worst_case_drift(const MarketModel& model, const GeneratingFunction& gen);

// drift of the reversing diffusion: (1/2)(c grad p / p + div c)
VectorFieldPtr reversing_drift(const MarketModel& model);

// reversing drift plus gamma / p for a divergence-free flux gamma; preserves
// the stationary density p. Checks div gamma = 0 by finite differences.
VectorFieldPtr perturbed_drift(const MarketModel& model, const VectorFieldPtr& gamma);

SdeSpec make_spec(const MarketModel& model, VectorFieldPtr drift, const Vec& x0, double dt,
                  double horizon, uint64_t seed);

// Stationary start helper: per-model sampler (gamma / gaussian via the rng,
// otherwise rejection against the guard box).
Vec sample_stationary(const MarketModel& model, Rng& rng);

PathBundle simulate(const SdeSpec& spec, int n_paths);

struct WealthSeries {
    // per path: terminal values of the two log-wealth accountings
    std::vector<double> terminal_ito;
    std::vector<double> terminal_functional;
    std::vector<double> growth_estimate;  // (1/T) log V_T per path, Ito series
    double pooled_growth = 0;             // batch-mean center
    double ci_half_width = 0;             // 95% batch-means half width
    int n_batches = 0;
    double max_terminal_gap = 0;  // max |ito - functional| over paths
    std::vector<double> batch_means;
};

struct WealthOptions {
    double burn_in_fraction = 0.10;
    int batches_per_path = 20;
};

WealthSeries wealth(const PathBundle& paths, const GeneratingFunction& gen,
                    const MarketModel& model, const WealthOptions& opts = {});

struct OccupancyHistogram {
    std::vector<double> edges_lo, edges_hi;  // flattened per-axis bin edges
    std::vector<double> empirical, reference;
    double outside_empirical = 0, outside_reference = 0;
    double tv_distance = 0;
    int bins_per_axis = 0;
    int dim = 1;
};

struct OccupancyOptions {
    int bins_per_axis = 40;
    double burn_in_fraction = 0.10;
    // binning window; defaults to a density-supported box
    std::optional<Vec> lo, hi;
};

OccupancyHistogram occupancy(const PathBundle& paths, const MarketModel& model,
                             const OccupancyOptions& opts = {});

// Empirical assumption (iii) check in d >= 2: explosion-free reversing paths
// across a short budget.
ReversingDiagnostic reversing_explosion_check(const MarketModel& model, double horizon = 50.0,
                                              int n_paths = 4, uint64_t seed = 777);

void write_paths_csv(const std::string& path, const PathBundle& bundle, int max_rows_per_path = 2000);
void write_wealth_csv(const std::string& path, const PathBundle& bundle,
                      const GeneratingFunction& gen, const MarketModel& model,
                      int max_rows_per_path = 2000);
void write_occupancy_csv(const std::string& path, const OccupancyHistogram& hist);

// two-sided 97.5% Student-t quantile (Cornish-Fisher expansion)
double t_quantile_975(int dof);

}  // namespace simulate
}  // namespace rgo
