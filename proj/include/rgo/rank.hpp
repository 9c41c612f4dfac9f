#pragma once

#include "rgo/growth_types.hpp"
#include "rgo/model.hpp"
#include "rgo/simulate.hpp"
#include "rgo/variational.hpp"

#include <array>

namespace rgo {
namespace rank {

// Ascending ordering with lexicographic tie-break. perm maps sorted slots to
// original indices (sorted[a] = x[perm[a]]); rank_of is its inverse.
struct Ordering {
    Vec sorted;
    std::array<int, kMaxDim> perm;
    std::array<int, kMaxDim> rank_of;
    double min_gap = 0;  // smallest adjacent gap in the sorted values
};

Ordering order(const Vec& x);

// Parameters of the boundary-regularizing covariance (diagonal exponent A,
// off-diagonal exponent B, common product exponent C) and the near-boundary
// generating-function exponent K.
struct ThetaParams {
    double A = 2, B = 2, C = 0;
    double K = 0;  // 0 = derive as min((A+C)/2, 0.9/d) at point of use

    void validate() const;               // A,B,C constraints
    double strategy_exponent(int d) const;  // K with K d < 1 enforced
};

// theta^{ij} = [i=j] (x^i)^A prod_l (x^l)^C
//            + [i!=j] (x^i)^B (x^j)^B prod_l (x^l)^{A+C-B}
// All derivatives are closed-form log-derivatives of the monomials.
class ThetaCovariance final : public CovarianceField {
  public:
    explicit ThetaCovariance(ThetaParams params);
    Mat value(const Vec& x) const override;
    Mat partial_matrix(const Vec& x, int k) const override;
    Vec divergence(const Vec& x) const override;
    double div_div(const Vec& x) const override;
    double second_partial(const Vec& x, int i, int j, int k, int l) const;

    // pointwise ellipticity floor k(x) with xi' theta xi >= k(x) |xi|^2
    double eigen_floor(const Vec& x) const;
    // factorizations used in the non-explosion argument:
    // div theta^i = x^i Y_i with 0 <= Y_i <= d (A+C),
    // theta^{ii} = (x^i)^2 Z_i^2 with 0 <= Z_i <= 1
    double factor_y(const Vec& x, int i) const;
    double factor_z(const Vec& x, int i) const;
    const ThetaParams& params() const { return params_; }

  private:
    double exponent(int i, int j, int l) const;
    ThetaParams params_;
};

// H(x) = (A+C) sum_l log x^l with theta^{-1} div theta = grad H.
ScalarFieldPtr theta_potential(const ThetaParams& params, int d);

// Smooth C^2 cutoff on the ordered simplex: 1 where every boundary distance
// (smallest coordinate, scaled adjacent gaps) is >= delta, 0 where any is
// <= delta/3. Product of quintic smoothsteps.
struct CutoffSpec {
    double delta = 0.15;
};

class ChiField final : public ScalarField {
  public:
    ChiField(CutoffSpec spec, int d) : spec_(spec), d_(d) {}
    double value(const Vec& x) const override;
    Vec gradient(const Vec& x) const override;
    Mat hessian(const Vec& x) const override;

  private:
    void distances(const Vec& x, double* dist, Mat* jac) const;
    CutoffSpec spec_;
    int d_;
};

// Ordered-simplex inputs (kappa, q). tie_smooth marks pairs whose
// symmetrization is C^2 across rank ties (pure theta, or theta-blended).
struct RankInputs {
    CovarianceFieldPtr kappa;
    ScalarFieldPtr q;
    int d = 2;
    bool tie_smooth = false;
};

// Blend (kappa, q) with (theta, const) near the ordered-simplex boundary:
// kappa_V = chi kappa + (1-chi) theta, q_V = chi q + (1-chi) qbar with qbar
// chosen so the mass stays exactly one. Returns the originals bit-identically
// where chi = 1.
RankInputs modify(const RankInputs& inputs, const CutoffSpec& cutoff, const ThetaParams& params);

// Rank symmetrization: c^{ij}(x) = kappa^{r(x^i) r(x^j)}(x_sorted),
// p(x) = q(x_sorted)/d!. Derivatives chain through the locally constant
// permutation; requesting them within 1e-9 of a rank tie on inputs that are
// not tie-smooth raises TieDerivative.
MarketModel symmetrize(const RankInputs& inputs, double mass_tolerance = 5e-3);

// Integral over the ordered simplex of an ambient integrand: (1/d!) of the
// symmetrized integral over the full simplex, on the shared masked lattice.
double ordered_simplex_integrate(const Domain& dom, const FnV& f_ordered, double eps, int cells);

// theta^i = K/x^i + (1 - K d): the near-boundary strategy, normalized to full
// investment sum_i x^i theta^i = 1.
VectorFieldPtr boundary_strategy(const ThetaParams& params, int d);

struct RankResult {
    GeneratingFunction gen;   // permutation-averaged potential
    GrowthReport report;
    double lambda_simplex = 0;  // (1/2) int_simplex p (grad u/u)' c (grad u/u)
    double lambda_ordered = 0;  // (1/2) int_ordered q (grad u/u)' kappa (grad u/u)
    variational::Solution solution;
};

struct RankOptions {
    int grid_level = 2;
    int quadrature_cells = 0;  // 0 = match the solve grid
};

RankResult rank_pipeline(const RankInputs& inputs, const RankOptions& opts = {});

// Orthant diffusion dX = (1/2) div theta dt + sqrt(theta) dW of the
// boundary covariance; never hits a coordinate hyperplane when the parameter
// constraints hold. Explosion = min_i X^i reaching the floor.
simulate::PathBundle simulate_theta_market(const ThetaParams& params, int d, double horizon = 5.0,
                                           double dt = 1e-3, int n_paths = 8, uint64_t seed = 99,
                                           double floor = 1e-10);

// Bundled rank presets.
RankInputs pure_theta_inputs_d2(const ThetaParams& params);   // q = theta-market invariant law
RankInputs tilted_theta_inputs(int d, const ThetaParams& params, double tilt);

}  // namespace rank
}  // namespace rgo
