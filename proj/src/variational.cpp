#include "rgo/variational.hpp"

#include "rgo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace rgo {
namespace variational {

namespace {

constexpr double kGaussOffset = 0.288675134594812882;  // 1/(2 sqrt 3)

struct QuadPoint {
    double local[2];
    double weight;  // fraction of cell volume
};

// 2-point Gauss per axis keeps the discrete energy, rhs and the scalar
// integrals on one shared rule, so the energy identity closes exactly.
std::vector<QuadPoint> cell_rule(int eff_dim) {
    const double a = 0.5 - kGaussOffset, b = 0.5 + kGaussOffset;
    if (eff_dim == 1) return {{{a, 0}, 0.5}, {{b, 0}, 0.5}};
    return {{{a, a}, 0.25}, {{b, a}, 0.25}, {{a, b}, 0.25}, {{b, b}, 0.25}};
}

int corners_per_cell(int eff_dim) { return eff_dim == 1 ? 2 : 4; }

// Q1 basis gradients at a local point (unit cell), scaled by 1/h later.
void basis_gradients(int eff_dim, const double local[2], double out[4][2]) {
    if (eff_dim == 1) {
        out[0][0] = -1;
        out[1][0] = 1;
        return;
    }
    const double s = local[0], t = local[1];
    out[0][0] = -(1 - t); out[0][1] = -(1 - s);
    out[1][0] = (1 - t);  out[1][1] = -s;
    out[2][0] = -t;       out[2][1] = (1 - s);
    out[3][0] = t;        out[3][1] = s;
}

void basis_values(int eff_dim, const double local[2], double out[4]) {
    if (eff_dim == 1) {
        out[0] = 1 - local[0];
        out[1] = local[0];
        return;
    }
    const double s = local[0], t = local[1];
    out[0] = (1 - s) * (1 - t);
    out[1] = s * (1 - t);
    out[2] = (1 - s) * t;
    out[3] = s * t;
}

struct CellEval {
    double p;
    Mat c;
    Vec pc_ell;  // p c ell = c grad p + p div c, no density division
};

CellEval eval_coeffs(const EffectiveModel& eff, const Vec& y) {
    CellEval e;
    e.p = eff.density(y);
    e.c = eff.covariance(y);
    e.pc_ell = e.c * eff.density_gradient(y) + e.p * eff.covariance_divergence(y);
    return e;
}

}  // namespace

GridSpec default_grid_spec(const MarketModel& model, int grid_level) {
    if (grid_level < 1) grid_level = 1;
    GridSpec spec;
    const int kind_base = model.is_simplex() ? 2 : 3;
    int n = kind_base + grid_level - 1;
    n = std::min(n, model.domain.levels());
    if (!model.is_simplex()) {
        // Stop growing the truncation once the density mass it misses is
        // negligible; coefficients degenerate far in the tails.
        int capped = kind_base;
        for (int m = kind_base; m <= n; ++m) {
            capped = m;
            if (1.0 - density_mass(model, m) <= 1e-10) break;
        }
        n = capped;
    }
    spec.exhaustion_level = n;

    const Truncation t = model.domain.exhaustion(spec.exhaustion_level);
    const int eff = model.effective_dim();
    double width = 0;
    for (size_t i = 0; i < t.lo.size(); ++i) width = std::max(width, t.hi[i] - t.lo[i]);
    const int base_cells = eff == 1 ? 1024 : 128;
    spec.target_h = width / base_cells / std::pow(2.0, grid_level - 1);
    return spec;
}

Grid build_grid(const MarketModel& model, const GridSpec& spec) {
    Grid g;
    g.eff_dim = model.effective_dim();
    if (g.eff_dim > 2) throw BadParams("grids support effective dimension 1 or 2 only");
    g.exhaustion_level = spec.exhaustion_level;
    const Truncation t = model.domain.exhaustion(spec.exhaustion_level);
    g.lo = t.lo;
    g.hi = t.hi;
    for (int i = 0; i < g.eff_dim; ++i) {
        int cells = spec.cells_per_axis;
        if (spec.target_h > 0) cells = std::max(2, int(std::lround((g.hi[i] - g.lo[i]) / spec.target_h)));
        g.cells_axis.push_back(cells);
        g.h.push_back((g.hi[i] - g.lo[i]) / cells);
    }

    const int nx = g.cells_axis[0] + 1;
    const int ny = g.eff_dim == 2 ? g.cells_axis[1] + 1 : 1;
    auto lattice_index = [&](int i, int j) { return i + nx * j; };
    auto node_y = [&](int i, int j) {
        Vec y(g.eff_dim);
        y[0] = g.lo[0] + i * g.h[0];
        if (g.eff_dim == 2) y[1] = g.lo[1] + j * g.h[1];
        return y;
    };

    const bool simplex = model.is_simplex();
    const double eps = simplex ? model.domain.simplex_eps(spec.exhaustion_level) : 0.0;
    auto point_inside = [&](int i, int j) {
        if (!simplex) return true;
        const Vec x = model.domain.to_ambient(node_y(i, j));
        return x.minCoeff() >= eps;
    };

    // keep a lattice cell when all corners are inside the truncation
    const int cx = g.cells_axis[0];
    const int cy = g.eff_dim == 2 ? g.cells_axis[1] : 1;
    std::vector<char> cell_keep(size_t(cx) * cy, 0);
    std::vector<char> point_in(size_t(nx) * ny, 0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) point_in[lattice_index(i, j)] = point_inside(i, j);
    auto cell_ok = [&](int i, int j) {
        if (g.eff_dim == 1) return point_in[i] && point_in[i + 1];
        return point_in[lattice_index(i, j)] && point_in[lattice_index(i + 1, j)] &&
               point_in[lattice_index(i, j + 1)] && point_in[lattice_index(i + 1, j + 1)];
    };
    for (int j = 0; j < cy; ++j)
        for (int i = 0; i < cx; ++i) cell_keep[i + size_t(cx) * j] = cell_ok(i, j);

    g.node_of.assign(size_t(nx) * ny, -1);
    auto touch = [&](int i, int j) {
        int& id = g.node_of[lattice_index(i, j)];
        if (id < 0) {
            id = int(g.nodes.size());
            g.nodes.push_back(node_y(i, j));
        }
        return id;
    };
    for (int j = 0; j < cy; ++j)
        for (int i = 0; i < cx; ++i) {
            if (!cell_keep[i + size_t(cx) * j]) continue;
            Grid::Cell cell{};
            cell.corner[0] = touch(i, j);
            cell.corner[1] = touch(i + 1, j);
            if (g.eff_dim == 2) {
                cell.corner[2] = touch(i, j + 1);
                cell.corner[3] = touch(i + 1, j + 1);
            } else {
                cell.corner[2] = cell.corner[3] = -1;
            }
            Vec c(g.eff_dim);
            c[0] = g.lo[0] + (i + 0.5) * g.h[0];
            if (g.eff_dim == 2) c[1] = g.lo[1] + (j + 0.5) * g.h[1];
            cell.center = c;
            g.cells.push_back(cell);

            // boundary faces: sides without a kept neighbor
            auto kept = [&](int ii, int jj) {
                if (ii < 0 || jj < 0 || ii >= cx || jj >= cy) return false;
                return cell_keep[ii + size_t(cx) * jj] != 0;
            };
            const int di[4] = {-1, 1, 0, 0}, dj[4] = {0, 0, -1, 1};
            const int nsides = g.eff_dim == 1 ? 2 : 4;
            for (int s = 0; s < nsides; ++s) {
                if (kept(i + di[s], j + dj[s])) continue;
                Grid::Face f;
                f.axis = s < 2 ? 0 : 1;
                f.sign = (s == 0 || s == 2) ? -1.0 : 1.0;
                Vec fc = c;
                fc[f.axis] += f.sign * 0.5 * g.h[f.axis];
                f.center = fc;
                f.area = g.eff_dim == 1 ? 1.0 : g.h[1 - f.axis];
                g.boundary_faces.push_back(f);
            }
        }
    if (g.nodes.empty()) throw GridTooCoarse("truncation produced an empty grid");
    return g;
}

void LinearSystem::multiply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

LinearSystem assemble(const Grid& grid, const MarketModel& model) {
    const int nc = corners_per_cell(grid.eff_dim);
    const int n = grid.n_nodes();

    // sparsity pattern from cell adjacency
    std::vector<std::vector<int>> adj(n);
    for (const auto& cell : grid.cells)
        for (int a = 0; a < nc; ++a)
            for (int b = 0; b < nc; ++b) adj[cell.corner[a]].push_back(cell.corner[b]);
    LinearSystem sys;
    sys.n = n;
    sys.row_ptr.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) {
        auto& row = adj[i];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        sys.row_ptr[i + 1] = sys.row_ptr[i] + int(row.size());
    }
    sys.col.resize(sys.row_ptr[n]);
    sys.val.assign(sys.row_ptr[n], 0.0);
    sys.rhs.assign(n, 0.0);
    for (int i = 0; i < n; ++i)
        std::copy(adj[i].begin(), adj[i].end(), sys.col.begin() + sys.row_ptr[i]);
    auto entry = [&](int i, int j) -> double& {
        const int lo = sys.row_ptr[i], hi = sys.row_ptr[i + 1];
        const int k = int(std::lower_bound(sys.col.begin() + lo, sys.col.begin() + hi, j) -
                          sys.col.begin());
        return sys.val[k];
    };

    EffectiveModel eff(model);
    const auto rule = cell_rule(grid.eff_dim);
    const double vol = grid.cell_volume();
    double grads[4][2];
    double basis[4];
    Vec gi(grid.eff_dim), gj(grid.eff_dim);
    for (const auto& cell : grid.cells) {
        double local_a[4][4] = {};
        double local_b[4] = {};
        for (const auto& qp : rule) {
            Vec y = cell.center;
            for (int d = 0; d < grid.eff_dim; ++d)
                y[d] += (qp.local[d] - 0.5) * grid.h[d];
            const CellEval ce = eval_coeffs(eff, y);
            if (!(ce.p > 0)) continue;  // vacuous tail cells carry no energy
            basis_gradients(grid.eff_dim, qp.local, grads);
            basis_values(grid.eff_dim, qp.local, basis);
            const double w = qp.weight * vol;
            for (int a = 0; a < nc; ++a) {
                for (int d = 0; d < grid.eff_dim; ++d) gi[d] = grads[a][d] / grid.h[d];
                const Vec cgi = ce.c * gi;
                for (int b = a; b < nc; ++b) {
                    for (int d = 0; d < grid.eff_dim; ++d) gj[d] = grads[b][d] / grid.h[d];
                    local_a[a][b] += w * ce.p * cgi.dot(gj);
                }
                local_b[a] += w * gi.dot(ce.pc_ell);
            }
        }
        for (int a = 0; a < nc; ++a) {
            entry(cell.corner[a], cell.corner[a]) += local_a[a][a];
            for (int b = a + 1; b < nc; ++b) {
                entry(cell.corner[a], cell.corner[b]) += local_a[a][b];
                entry(cell.corner[b], cell.corner[a]) += local_a[a][b];
            }
            sys.rhs[cell.corner[a]] += local_b[a];
        }
    }

    // symmetry audit (a defective flux stencil would show up here)
    double defect = 0, scale = 0;
    for (int i = 0; i < n; ++i)
        for (int k = sys.row_ptr[i]; k < sys.row_ptr[i + 1]; ++k) {
            const int j = sys.col[k];
            scale = std::max(scale, std::abs(sys.val[k]));
            if (j < i) continue;
            const int lo = sys.row_ptr[j], hi = sys.row_ptr[j + 1];
            const int kk = int(std::lower_bound(sys.col.begin() + lo, sys.col.begin() + hi, i) -
                               sys.col.begin());
            defect = std::max(defect, std::abs(sys.val[k] - sys.val[kk]));
        }
    sys.symmetry_defect = defect;
    if (defect > 1e-10 * std::max(1.0, scale))
        throw NonSymmetricAssembly("assembled matrix is not symmetric");
    return sys;
}

namespace {

// LDL' factorization of the tridiagonal part; exact inverse in 1-D, where the
// matrix itself is tridiagonal.
struct TriDiagPrecond {
    std::vector<double> d, e;  // diag of D, subdiagonal of L
    void build(const LinearSystem& sys) {
        const int n = sys.n;
        std::vector<double> a(n, 0.0), b(n, 0.0);  // diag, lower offdiag
        double max_diag = 0;
        for (int i = 0; i < n; ++i)
            for (int k = sys.row_ptr[i]; k < sys.row_ptr[i + 1]; ++k) {
                if (sys.col[k] == i) a[i] = sys.val[k];
                if (sys.col[k] == i - 1) b[i] = sys.val[k];
            }
        for (double v : a) max_diag = std::max(max_diag, v);
        const double shift = 1e-12 * std::max(1.0, max_diag);
        d.assign(n, 0.0);
        e.assign(n, 0.0);
        d[0] = a[0] + shift;
        for (int i = 1; i < n; ++i) {
            e[i] = b[i] / d[i - 1];
            d[i] = a[i] + shift - e[i] * b[i];
        }
    }
    void apply(const std::vector<double>& r, std::vector<double>& z) const {
        const int n = int(d.size());
        z = r;
        for (int i = 1; i < n; ++i) z[i] -= e[i] * z[i - 1];
        for (int i = 0; i < n; ++i) z[i] /= d[i];
        for (int i = n - 2; i >= 0; --i) z[i] -= e[i + 1] * z[i + 1];
    }
};

void project_mean_zero(std::vector<double>& v) {
    double m = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    for (double& x : v) x -= m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::vector<Vec> reconstruct_gradients(const Grid& grid, const std::vector<double>& values) {
    const int nc = corners_per_cell(grid.eff_dim);
    std::vector<Vec> out(grid.cells.size());
    double grads[4][2];
    const double center[2] = {0.5, 0.5};
    basis_gradients(grid.eff_dim, center, grads);
    for (size_t ci = 0; ci < grid.cells.size(); ++ci) {
        Vec g = Vec::Zero(grid.eff_dim);
        for (int a = 0; a < nc; ++a)
            for (int d = 0; d < grid.eff_dim; ++d)
                g[d] += values[grid.cells[ci].corner[a]] * grads[a][d] / grid.h[d];
        out[ci] = g;
    }
    return out;
}

}  // namespace

DiscretePotential solve_phi(const LinearSystem& sys, const Grid& grid, double tol, int max_iter) {
    const int n = sys.n;
    std::vector<double> b = sys.rhs;
    project_mean_zero(b);
    const double bnorm = std::sqrt(dot(b, b));
    DiscretePotential out;
    out.values.assign(n, 0.0);
    if (bnorm == 0.0) {
        out.cell_gradient = reconstruct_gradients(grid, out.values);
        return out;
    }

    TriDiagPrecond tri;
    std::vector<double> diag(n, 1.0);
    const bool use_tri = grid.eff_dim == 1;
    if (use_tri) {
        tri.build(sys);
    } else {
        double mx = 0;
        for (int i = 0; i < n; ++i)
            for (int k = sys.row_ptr[i]; k < sys.row_ptr[i + 1]; ++k)
                if (sys.col[k] == i) diag[i] = sys.val[k];
        for (double v : diag) mx = std::max(mx, v);
        for (double& v : diag)
            if (!(v > 1e-300 * mx)) v = mx;  // vacuous tail nodes
    }
    auto precond = [&](const std::vector<double>& r, std::vector<double>& z) {
        if (use_tri) {
            tri.apply(r, z);
        } else {
            z.resize(n);
            for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        }
        project_mean_zero(z);
    };

    std::vector<double> x(n, 0.0), r = b, z, p, q;
    precond(r, z);
    p = z;
    double rz = dot(r, z);
    int it = 0;
    double rnorm = bnorm;
    for (; it < max_iter; ++it) {
        sys.multiply(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0)) break;  // exhausted the range space
        const double alpha = rz / pq;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        if (it % 50 == 49) project_mean_zero(r);
        rnorm = std::sqrt(dot(r, r));
        if (rnorm <= tol * bnorm) break;
        precond(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    if (rnorm > tol * bnorm && it >= max_iter)
        throw NoConvergence("conjugate-direction solve stalled at relative residual " +
                                std::to_string(rnorm / bnorm),
                            rnorm);
    project_mean_zero(x);
    out.values = std::move(x);
    out.iterations = it + 1;
    out.residual = rnorm;
    out.cell_gradient = reconstruct_gradients(grid, out.values);
    return out;
}

namespace {

// Shared walker for the three grid integrals; keeps them on one quadrature.
template <typename F>
double cell_quadrature(const MarketModel& model, const Grid& grid, F&& term) {
    EffectiveModel eff(model);
    const auto rule = cell_rule(grid.eff_dim);
    const double vol = grid.cell_volume();
    double total = 0;
    for (const auto& cell : grid.cells) {
        for (const auto& qp : rule) {
            Vec y = cell.center;
            for (int d = 0; d < grid.eff_dim; ++d) y[d] += (qp.local[d] - 0.5) * grid.h[d];
            total += qp.weight * vol * term(eff, cell, qp.local, y);
        }
    }
    return total;
}

Vec q1_gradient_at(const Grid& grid, const Grid::Cell& cell, const std::vector<double>& values,
                   const double local[2]) {
    double grads[4][2];
    basis_gradients(grid.eff_dim, local, grads);
    Vec g = Vec::Zero(grid.eff_dim);
    const int nc = corners_per_cell(grid.eff_dim);
    for (int a = 0; a < nc; ++a)
        for (int d = 0; d < grid.eff_dim; ++d)
            g[d] += values[cell.corner[a]] * grads[a][d] / grid.h[d];
    return g;
}

}  // namespace

double lambda_from_phi(const DiscretePotential& phi, const MarketModel& model, const Grid& grid) {
    return cell_quadrature(model, grid,
                           [&](const EffectiveModel& eff, const Grid::Cell& cell,
                               const double local[2], const Vec& y) {
                               const double p = eff.density(y);
                               if (!(p > 0)) return 0.0;
                               const Vec g = q1_gradient_at(grid, cell, phi.values, local);
                               return p * double(g.dot(eff.covariance(y) * g));
                           }) /
           8.0;
}

double objective_value(const DiscretePotential& phi, const MarketModel& model, const Grid& grid) {
    return cell_quadrature(
        model, grid,
        [&](const EffectiveModel& eff, const Grid::Cell& cell, const double local[2],
            const Vec& y) {
            const double p = eff.density(y);
            if (!(p > 0)) return 0.0;
            const Vec diff = q1_gradient_at(grid, cell, phi.values, local) - eff.ell(y);
            return p * double(diff.dot(eff.covariance(y) * diff));
        });
}

double ell_energy(const MarketModel& model, const Grid& grid) {
    return cell_quadrature(model, grid,
                           [&](const EffectiveModel& eff, const Grid::Cell&, const double[2],
                               const Vec& y) {
                               const double p = eff.density(y);
                               if (!(p > 0)) return 0.0;
                               const Vec l = eff.ell(y);
                               return p * double(l.dot(eff.covariance(y) * l));
                           });
}

double flux_balance_diagnostic(const MarketModel& model, const Grid& grid) {
    EffectiveModel eff(model);
    double total = 0;
    for (const auto& f : grid.boundary_faces) {
        // p c ell = c grad p + p div c is division-free at vanishing density
        const Vec flux = eff.covariance(f.center) * eff.density_gradient(f.center) +
                         eff.density(f.center) * eff.covariance_divergence(f.center);
        total += f.sign * flux[f.axis] * f.area;
    }
    return total;
}

Solution solve_model(const MarketModel& model, const SolveOptions& opts) {
    const int level = opts.grid_level > 0 ? opts.grid_level : 2;
    Solution sol;
    sol.grid = build_grid(model, default_grid_spec(model, level));
    LinearSystem sys = assemble(sol.grid, model);
    sol.potential = solve_phi(sys, sol.grid, opts.tol, opts.max_iter);
    sol.lambda = lambda_from_phi(sol.potential, model, sol.grid);
    sol.objective = objective_value(sol.potential, model, sol.grid);
    sol.ell_energy = ell_energy(model, sol.grid);
    sol.boundary_flux = flux_balance_diagnostic(model, sol.grid);
    return sol;
}

ConvergenceTable refinement_study(const MarketModel& model, int levels, int base_level) {
    if (levels < 2) throw BadParams("refinement_study needs at least two levels");
    ConvergenceTable table;
    double prev_lambda = 0, prev_diff = 0;
    for (int l = 0; l < levels; ++l) {
        const int grid_level = base_level + l;
        const GridSpec spec = default_grid_spec(model, grid_level);
        const Grid grid = build_grid(model, spec);
        LinearSystem sys = assemble(grid, model);
        DiscretePotential phi = solve_phi(sys, grid);
        const double lambda = lambda_from_phi(phi, model, grid);
        ConvergenceRow row;
        row.grid_level = grid_level;
        row.exhaustion_level = spec.exhaustion_level;
        row.h = grid.h[0];
        row.lambda = lambda;
        row.diff_prev = l == 0 ? std::numeric_limits<double>::quiet_NaN()
                               : std::abs(lambda - prev_lambda);
        row.observed_order = std::numeric_limits<double>::quiet_NaN();
        if (l >= 2 && row.diff_prev > 0)
            row.observed_order = std::log2(prev_diff / row.diff_prev);
        table.rows.push_back(row);
        if (l >= 2 && row.diff_prev > prev_diff) table.non_monotone = true;
        prev_lambda = lambda;
        if (l >= 1) prev_diff = row.diff_prev;
    }
    table.final_lambda = table.rows.back().lambda;
    table.observed_order = table.rows.back().observed_order;
    return table;
}

void ConvergenceTable::write_csv(const std::string& path) const {
    std::ofstream out(path);
    out << "grid_level,exhaustion_level,h,lambda,diff_prev,observed_order\n";
    for (const auto& r : rows)
        out << r.grid_level << ',' << r.exhaustion_level << ',' << r.h << ',' << r.lambda << ','
            << r.diff_prev << ',' << r.observed_order << '\n';
}

PotentialField::PotentialField(const MarketModel& model, Grid grid, std::vector<double> values)
    : domain_(model.domain), grid_(std::move(grid)), values_(std::move(values)) {
    const int cx = grid_.cells_axis[0];
    const int cy = grid_.eff_dim == 2 ? grid_.cells_axis[1] : 1;
    cell_lookup_.assign(size_t(cx) * cy, -1);
    for (size_t ci = 0; ci < grid_.cells.size(); ++ci) {
        const Vec& c = grid_.cells[ci].center;
        const int i = int((c[0] - grid_.lo[0]) / grid_.h[0]);
        const int j = grid_.eff_dim == 2 ? int((c[1] - grid_.lo[1]) / grid_.h[1]) : 0;
        cell_lookup_[i + size_t(cx) * j] = int(ci);
    }
}

void PotentialField::locate(const Vec& y, int cell_out[2], Vec& local) const {
    const int cx = grid_.cells_axis[0];
    const int cy = grid_.eff_dim == 2 ? grid_.cells_axis[1] : 1;
    int i = std::clamp(int(std::floor((y[0] - grid_.lo[0]) / grid_.h[0])), 0, cx - 1);
    int j = grid_.eff_dim == 2
                ? std::clamp(int(std::floor((y[1] - grid_.lo[1]) / grid_.h[1])), 0, cy - 1)
                : 0;
    // masked grids: walk outward to the nearest kept cell (staircase edges)
    if (cell_lookup_[i + size_t(cx) * j] < 0) {
        for (int radius = 1; radius < std::max(cx, cy); ++radius) {
            bool found = false;
            for (int dj = -radius; dj <= radius && !found; ++dj)
                for (int di = -radius; di <= radius && !found; ++di) {
                    const int ii = i + di, jj = j + dj;
                    if (ii < 0 || jj < 0 || ii >= cx || jj >= cy) continue;
                    if (cell_lookup_[ii + size_t(cx) * jj] >= 0) {
                        i = ii;
                        j = jj;
                        found = true;
                    }
                }
            if (found) break;
        }
    }
    cell_out[0] = i;
    cell_out[1] = j;
    local.resize(grid_.eff_dim);
    local[0] = std::clamp((y[0] - (grid_.lo[0] + i * grid_.h[0])) / grid_.h[0], 0.0, 1.0);
    if (grid_.eff_dim == 2)
        local[1] = std::clamp((y[1] - (grid_.lo[1] + j * grid_.h[1])) / grid_.h[1], 0.0, 1.0);
}

double PotentialField::value_slice(const Vec& y) const {
    int ij[2];
    Vec local;
    locate(y, ij, local);
    const int cx = grid_.cells_axis[0];
    const auto& cell = grid_.cells[cell_lookup_[ij[0] + size_t(cx) * ij[1]]];
    double basis[4];
    double loc[2] = {local[0], grid_.eff_dim == 2 ? local[1] : 0.0};
    basis_values(grid_.eff_dim, loc, basis);
    double v = 0;
    for (int a = 0; a < corners_per_cell(grid_.eff_dim); ++a)
        v += basis[a] * values_[cell.corner[a]];
    return v;
}

Vec PotentialField::gradient_slice(const Vec& y) const {
    int ij[2];
    Vec local;
    locate(y, ij, local);
    const int cx = grid_.cells_axis[0];
    const auto& cell = grid_.cells[cell_lookup_[ij[0] + size_t(cx) * ij[1]]];
    double loc[2] = {local[0], grid_.eff_dim == 2 ? local[1] : 0.0};
    return q1_gradient_at(grid_, cell, values_, loc);
}

double PotentialField::value(const Vec& x) const { return value_slice(domain_.to_slice(x)); }

Vec PotentialField::gradient(const Vec& x) const {
    const Vec gy = gradient_slice(domain_.to_slice(x));
    if (domain_.kind() != DomainKind::simplex) return gy;
    return domain_.slice_basis() * gy;
}

Mat PotentialField::hessian(const Vec& x) const {
    const int d = int(x.size());
    Mat h(d, d);
    const double step = 0.5 * grid_.h[0];
    for (int k = 0; k < d; ++k) {
        Vec xp = x, xm = x;
        xp[k] += step;
        xm[k] -= step;
        h.col(k) = (gradient(xp) - gradient(xm)) / (2 * step);
    }
    return Mat(0.5 * (h + h.transpose()));
}

void write_potential_csv(const std::string& path, const MarketModel& model, const Grid& grid,
                         const DiscretePotential& phi) {
    // nodal gradient magnitude from adjacent cell reconstructions
    std::vector<double> mag(grid.n_nodes(), 0.0);
    std::vector<int> count(grid.n_nodes(), 0);
    const int nc = corners_per_cell(grid.eff_dim);
    for (size_t ci = 0; ci < grid.cells.size(); ++ci)
        for (int a = 0; a < nc; ++a) {
            mag[grid.cells[ci].corner[a]] += phi.cell_gradient[ci].norm();
            ++count[grid.cells[ci].corner[a]];
        }
    std::ofstream out(path);
    const int ad = model.ambient_dim();
    out << "node";
    for (int i = 0; i < ad; ++i) out << ",x" << i + 1;
    out << ",phi,grad_norm\n";
    for (int i = 0; i < grid.n_nodes(); ++i) {
        const Vec x = model.domain.to_ambient(grid.nodes[i]);
        out << i;
        for (int k = 0; k < ad; ++k) out << ',' << x[k];
        out << ',' << phi.values[i] << ',' << (count[i] ? mag[i] / count[i] : 0.0) << '\n';
    }
}

}  // namespace variational
}  // namespace rgo
