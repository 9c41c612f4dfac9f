#pragma once

#include "rgo/growth_types.hpp"
#include "rgo/model.hpp"

#include <string>
#include <vector>

namespace rgo {
namespace variational {

// Structured lattice over one truncation E_n, in effective coordinates
// (interval/box axes, or simplex slice coordinates). Simplex grids mask
// lattice cells whose corners leave {min_i x^i >= eps_n}.
struct Grid {
    int eff_dim = 1;
    int exhaustion_level = 1;
    std::vector<double> lo, hi;   // lattice bounding box
    std::vector<int> cells_axis;  // lattice cells per axis
    std::vector<double> h;        // spacing per axis

    std::vector<Vec> nodes;      // compact node id -> y
    std::vector<int> node_of;    // lattice point index -> node id or -1
    struct Cell {
        int corner[4];  // node ids, lexicographic; [2],[3] unused in 1-D
        Vec center;
    };
    std::vector<Cell> cells;
    struct Face {
        Vec center;
        int axis;
        double sign;  // outward normal = sign * e_axis
        double area;
    };
    std::vector<Face> boundary_faces;

    int n_nodes() const { return int(nodes.size()); }
    double cell_volume() const {
        double v = 1;
        for (double hi_ : h) v *= hi_;
        return v;
    }
};

struct GridSpec {
    int exhaustion_level = 3;
    double target_h = 0.0;  // per-axis spacing; 0 = pick from cells_per_axis
    int cells_per_axis = 0;
};

GridSpec default_grid_spec(const MarketModel& model, int grid_level);
Grid build_grid(const MarketModel& model, const GridSpec& spec);

// Symmetric positive semidefinite system with nullspace spanned by the
// constant vector; CSR storage.
struct LinearSystem {
    int n = 0;
    std::vector<int> row_ptr, col;
    std::vector<double> val;
    std::vector<double> rhs;
    double symmetry_defect = 0;

    void multiply(const std::vector<double>& x, std::vector<double>& y) const;
};

// Discrete flux-form stationarity of the minimization: for every nodal test
// function, the p c (grad phi - ell) fluxes balance; natural (zero conormal
// flux) condition on the truncation boundary.
LinearSystem assemble(const Grid& grid, const MarketModel& model);

struct DiscretePotential {
    std::vector<double> values;     // mean-zero nodal values
    std::vector<Vec> cell_gradient; // per-cell reconstruction
    int iterations = 0;
    double residual = 0;
};

DiscretePotential solve_phi(const LinearSystem& system, const Grid& grid, double tol = 1e-10,
                            int max_iter = 50000);

// lambda = (1/8) sum_cells grad(phi)' c grad(phi) p vol (Gauss points per cell).
double lambda_from_phi(const DiscretePotential& phi, const MarketModel& model, const Grid& grid);

// J(phi) = integral (grad phi - ell)' c (grad phi - ell) p over the grid.
double objective_value(const DiscretePotential& phi, const MarketModel& model, const Grid& grid);

// integral of ell' c ell p over the grid (same quadrature as the two above).
double ell_energy(const MarketModel& model, const Grid& grid);

// Total boundary flux of p c ell through the truncation boundary; decays to
// zero with the exhaustion level when the divergence integral vanishes.
double flux_balance_diagnostic(const MarketModel& model, const Grid& grid);

struct ConvergenceRow {
    int grid_level;
    int exhaustion_level;
    double h;
    double lambda;
    double diff_prev;      // |lambda - previous lambda|
    double observed_order; // log2(diff ratios), NaN for first rows
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    bool non_monotone = false;  // increments grew across the last two levels
    double final_lambda = 0;
    double observed_order = 0;  // from the last three rows
    void write_csv(const std::string& path) const;
};

ConvergenceTable refinement_study(const MarketModel& model, int levels, int base_level = 1);

struct SolveOptions {
    int grid_level = 0;  // 0 = default (level 2)
    double tol = 1e-10;
    int max_iter = 50000;
};

struct Solution {
    Grid grid;
    DiscretePotential potential;
    double lambda = 0;
    double objective = 0;    // J(phi_hat)
    double ell_energy = 0;   // integral ell' c ell p
    double boundary_flux = 0;
};

Solution solve_model(const MarketModel& model, const SolveOptions& opts = {});

// Continuous view of a solved potential: Q1 interpolation in effective
// coordinates, exposed as an ambient-coordinate scalar field.
class PotentialField final : public ScalarField {
  public:
    PotentialField(const MarketModel& model, Grid grid, std::vector<double> values);
    double value(const Vec& x) const override;
    Vec gradient(const Vec& x) const override;  // ambient (tangent-lifted on simplex)
    Mat hessian(const Vec& x) const override;   // finite differences of the gradient

    double value_slice(const Vec& y) const;
    Vec gradient_slice(const Vec& y) const;

  private:
    void locate(const Vec& y, int cell_idx[2], Vec& local) const;
    Domain domain_;
    Grid grid_;
    std::vector<double> values_;
    std::vector<int> cell_lookup_;  // lattice cell -> cells index or -1
};

void write_potential_csv(const std::string& path, const MarketModel& model, const Grid& grid,
                         const DiscretePotential& phi);

}  // namespace variational
}  // namespace rgo
