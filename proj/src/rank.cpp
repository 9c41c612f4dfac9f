#include "rgo/rank.hpp"

#include "rgo/preset_fields.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rgo {
namespace rank {

Ordering order(const Vec& x) {
    const int d = int(x.size());
    Ordering o;
    o.sorted.resize(d);
    std::array<int, kMaxDim> idx{};
    std::iota(idx.begin(), idx.begin() + d, 0);
    std::stable_sort(idx.begin(), idx.begin() + d,
                     [&](int a, int b) { return x[a] < x[b]; });
    o.min_gap = std::numeric_limits<double>::infinity();
    for (int a = 0; a < d; ++a) {
        o.perm[a] = idx[a];
        o.rank_of[idx[a]] = a;
        o.sorted[a] = x[idx[a]];
        if (a > 0) o.min_gap = std::min(o.min_gap, o.sorted[a] - o.sorted[a - 1]);
    }
    return o;
}

void ThetaParams::validate() const {
    std::string bad;
    if (!(C >= 0)) bad += " C>=0";
    if (!(B <= A && A < 2 * B)) bad += " B<=A<2B";
    if (!(A + C >= 2)) bad += " A+C>=2";
    if (!bad.empty()) throw BadParams("theta parameter constraints violated:" + bad);
}

double ThetaParams::strategy_exponent(int d) const {
    double k = K > 0 ? K : std::min((A + C) / 2.0, 0.9 / d);
    if (!(k > 0) || k * d >= 1)
        throw BadParams("strategy exponent needs 0 < K and K d < 1");
    return k;
}

ThetaCovariance::ThetaCovariance(ThetaParams params) : params_(params) { params_.validate(); }

double ThetaCovariance::exponent(int i, int j, int l) const {
    if (i == j) return (l == i ? params_.A : 0.0) + params_.C;
    return (l == i ? params_.B : 0.0) + (l == j ? params_.B : 0.0) + params_.A + params_.C -
           params_.B;
}

Mat ThetaCovariance::value(const Vec& x) const {
    const int d = int(x.size());
    double prod_c = 1, prod_acb = 1;
    for (int l = 0; l < d; ++l) {
        prod_c *= std::pow(x[l], params_.C);
        prod_acb *= std::pow(x[l], params_.A + params_.C - params_.B);
    }
    Mat t(d, d);
    for (int i = 0; i < d; ++i) {
        t(i, i) = std::pow(x[i], params_.A) * prod_c;
        for (int j = i + 1; j < d; ++j) {
            const double v = std::pow(x[i], params_.B) * std::pow(x[j], params_.B) * prod_acb;
            t(i, j) = v;
            t(j, i) = v;
        }
    }
    return t;
}

Mat ThetaCovariance::partial_matrix(const Vec& x, int k) const {
    const int d = int(x.size());
    const Mat t = value(x);
    Mat out(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out(i, j) = t(i, j) * exponent(i, j, k) / x[k];
    return out;
}

Vec ThetaCovariance::divergence(const Vec& x) const {
    // sum_j d_j theta^{ij} = (A+C) sum_j theta^{ij} / x^j
    const int d = int(x.size());
    const Mat t = value(x);
    Vec out(d);
    for (int i = 0; i < d; ++i) {
        double s = 0;
        for (int j = 0; j < d; ++j) s += t(i, j) / x[j];
        out[i] = (params_.A + params_.C) * s;
    }
    return out;
}

double ThetaCovariance::second_partial(const Vec& x, int i, int j, int k, int l) const {
    const double t = value(x)(i, j);
    const double ek = exponent(i, j, k), el = exponent(i, j, l);
    double v = t * ek * el / (x[k] * x[l]);
    if (k == l) v -= t * ek / (x[k] * x[k]);
    return v;
}

double ThetaCovariance::div_div(const Vec& x) const {
    const int d = int(x.size());
    const double ac = params_.A + params_.C;
    const Mat t = value(x);
    double s = 0;
    for (int i = 0; i < d; ++i) {
        s += ac * (ac - 1) * t(i, i) / (x[i] * x[i]);
        for (int j = 0; j < d; ++j)
            if (j != i) s += ac * ac * t(i, j) / (x[i] * x[j]);
    }
    return s;
}

double ThetaCovariance::eigen_floor(const Vec& x) const {
    const int d = int(x.size());
    double prod_c = 1, xmin = x[0], xmax = x[0];
    for (int l = 0; l < d; ++l) {
        prod_c *= std::pow(x[l], params_.C);
        xmin = std::min(xmin, x[l]);
        xmax = std::max(xmax, x[l]);
    }
    return prod_c * (1.0 - std::pow(xmax, 2 * params_.B - params_.A)) *
           std::min(1.0, std::pow(xmin, params_.A));
}

double ThetaCovariance::factor_y(const Vec& x, int i) const {
    return divergence(x)[i] / x[i];
}

double ThetaCovariance::factor_z(const Vec& x, int i) const {
    return std::sqrt(value(x)(i, i)) / x[i];
}

namespace {

class ThetaPotential final : public ScalarField {
  public:
    ThetaPotential(double ac, int d) : ac_(ac), d_(d) {}
    double value(const Vec& x) const override {
        double s = 0;
        for (int l = 0; l < d_; ++l) s += std::log(x[l]);
        return ac_ * s;
    }
    Vec gradient(const Vec& x) const override {
        Vec g(d_);
        for (int l = 0; l < d_; ++l) g[l] = ac_ / x[l];
        return g;
    }
    Mat hessian(const Vec& x) const override {
        Mat h = Mat::Zero(d_, d_);
        for (int l = 0; l < d_; ++l) h(l, l) = -ac_ / (x[l] * x[l]);
        return h;
    }

  private:
    double ac_;
    int d_;
};

// quintic smoothstep: 0 below lo, 1 above hi, C^2 across both knees
struct SmoothStep {
    double lo, hi;
    double eval(double t, double* d1 = nullptr, double* d2 = nullptr) const {
        if (t <= lo) {
            if (d1) *d1 = 0;
            if (d2) *d2 = 0;
            return 0;
        }
        if (t >= hi) {
            if (d1) *d1 = 0;
            if (d2) *d2 = 0;
            return 1;
        }
        const double w = hi - lo;
        const double u = (t - lo) / w;
        if (d1) *d1 = 30 * u * u * (1 - u) * (1 - u) / w;
        if (d2) *d2 = 60 * u * (1 - u) * (1 - 2 * u) / (w * w);
        return u * u * u * (10 + u * (-15 + 6 * u));
    }
};

}  // namespace

ScalarFieldPtr theta_potential(const ThetaParams& params, int d) {
    params.validate();
    return std::make_shared<ThetaPotential>(params.A + params.C, d);
}

// distances to the ordered-simplex boundary: smallest coordinate, then each
// adjacent gap scaled to euclidean distance from the tie hyperplane
void ChiField::distances(const Vec& x, double* dist, Mat* jac) const {
    dist[0] = x[0];
    if (jac) {
        jac->setZero(d_, d_);
        (*jac)(0, 0) = 1;
    }
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int k = 1; k < d_; ++k) {
        dist[k] = (x[k] - x[k - 1]) * inv_sqrt2;
        if (jac) {
            (*jac)(k, k) = inv_sqrt2;
            (*jac)(k, k - 1) = -inv_sqrt2;
        }
    }
}

double ChiField::value(const Vec& x) const {
    double dist[kMaxDim];
    distances(x, dist, nullptr);
    const SmoothStep step{spec_.delta / 3.0, spec_.delta};
    double chi = 1;
    for (int k = 0; k < d_; ++k) chi *= step.eval(dist[k]);
    return chi;
}

Vec ChiField::gradient(const Vec& x) const {
    double dist[kMaxDim];
    Mat jac;
    distances(x, dist, &jac);
    const SmoothStep step{spec_.delta / 3.0, spec_.delta};
    double f[kMaxDim], f1[kMaxDim];
    for (int k = 0; k < d_; ++k) f[k] = step.eval(dist[k], &f1[k]);
    Vec g = Vec::Zero(d_);
    for (int k = 0; k < d_; ++k) {
        double rest = 1;
        for (int m = 0; m < d_; ++m)
            if (m != k) rest *= f[m];
        g += rest * f1[k] * jac.row(k).transpose();
    }
    return g;
}

Mat ChiField::hessian(const Vec& x) const {
    double dist[kMaxDim];
    Mat jac;
    distances(x, dist, &jac);
    const SmoothStep step{spec_.delta / 3.0, spec_.delta};
    double f[kMaxDim], f1[kMaxDim], f2[kMaxDim];
    for (int k = 0; k < d_; ++k) f[k] = step.eval(dist[k], &f1[k], &f2[k]);
    Mat h = Mat::Zero(d_, d_);
    for (int k = 0; k < d_; ++k) {
        double rest_k = 1;
        for (int m = 0; m < d_; ++m)
            if (m != k) rest_k *= f[m];
        const Vec jk = jac.row(k).transpose();
        h += rest_k * f2[k] * jk * jk.transpose();
        for (int l = 0; l < d_; ++l) {
            if (l == k) continue;
            double rest_kl = 1;
            for (int m = 0; m < d_; ++m)
                if (m != k && m != l) rest_kl *= f[m];
            h += rest_kl * f1[k] * f1[l] * jk * jac.row(l).transpose();
        }
    }
    return h;
}

namespace {

// --- blended fields for the boundary modification --------------------------

class BlendedCovariance final : public CovarianceField {
  public:
    BlendedCovariance(CovarianceFieldPtr kappa, std::shared_ptr<const ThetaCovariance> theta,
                      std::shared_ptr<const ChiField> chi)
        : kappa_(std::move(kappa)), theta_(std::move(theta)), chi_(std::move(chi)) {}

    Mat value(const Vec& x) const override {
        const double c = chi_->value(x);
        if (c == 1.0) return kappa_->value(x);
        if (c == 0.0) return theta_->value(x);
        return Mat(c * kappa_->value(x) + (1 - c) * theta_->value(x));
    }
    Mat partial_matrix(const Vec& x, int k) const override {
        const double c = chi_->value(x);
        const Vec gc = chi_->gradient(x);
        Mat out = c * kappa_->partial_matrix(x, k) + (1 - c) * theta_->partial_matrix(x, k);
        if (gc[k] != 0) out += gc[k] * (kappa_->value(x) - theta_->value(x));
        return out;
    }
    Vec divergence(const Vec& x) const override {
        const double c = chi_->value(x);
        const Vec gc = chi_->gradient(x);
        Vec out = c * kappa_->divergence(x) + (1 - c) * theta_->divergence(x);
        if (!gc.isZero()) out += (kappa_->value(x) - theta_->value(x)) * gc;
        return out;
    }
    double div_div(const Vec& x) const override {
        const double c = chi_->value(x);
        const Vec gc = chi_->gradient(x);
        double out = c * kappa_->div_div(x) + (1 - c) * theta_->div_div(x);
        if (!gc.isZero()) {
            out += 2 * gc.dot(kappa_->divergence(x) - theta_->divergence(x));
            const Mat hc = chi_->hessian(x);
            const Mat diff = kappa_->value(x) - theta_->value(x);
            out += (hc.array() * diff.array()).sum();
        }
        return out;
    }

  private:
    CovarianceFieldPtr kappa_;
    std::shared_ptr<const ThetaCovariance> theta_;
    std::shared_ptr<const ChiField> chi_;
};

class BlendedDensity final : public ScalarField {
  public:
    BlendedDensity(ScalarFieldPtr q, double flat, std::shared_ptr<const ChiField> chi)
        : q_(std::move(q)), flat_(flat), chi_(std::move(chi)) {}
    double value(const Vec& x) const override {
        const double c = chi_->value(x);
        if (c == 1.0) return q_->value(x);
        return c * q_->value(x) + (1 - c) * flat_;
    }
    Vec gradient(const Vec& x) const override {
        const double c = chi_->value(x);
        Vec out = c * q_->gradient(x);
        const Vec gc = chi_->gradient(x);
        if (!gc.isZero()) out += (q_->value(x) - flat_) * gc;
        return out;
    }
    Mat hessian(const Vec& x) const override {
        const double c = chi_->value(x);
        Mat out = c * q_->hessian(x);
        const Vec gc = chi_->gradient(x);
        if (!gc.isZero()) {
            const Vec gq = q_->gradient(x);
            out += gc * gq.transpose() + gq * gc.transpose();
            out += (q_->value(x) - flat_) * chi_->hessian(x);
        }
        return out;
    }

  private:
    ScalarFieldPtr q_;
    double flat_;
    std::shared_ptr<const ChiField> chi_;
};

double ordered_region_integrate(int d, const FnV& f) {
    return ordered_simplex_exact_integrate(d, f);
}

}  // namespace

RankInputs modify(const RankInputs& inputs, const CutoffSpec& cutoff, const ThetaParams& params) {
    params.validate();
    auto chi = std::make_shared<ChiField>(cutoff, inputs.d);
    auto theta = std::make_shared<ThetaCovariance>(params);
    auto q = inputs.q;
    const double chi_q_mass =
        ordered_region_integrate(inputs.d, [&](const Vec& x) { return chi->value(x) * q->value(x); });
    const double one_minus_chi =
        ordered_region_integrate(inputs.d, [&](const Vec& x) { return 1.0 - chi->value(x); });
    if (!(one_minus_chi > 0)) throw BadParams("cutoff never leaves the inner region");
    const double flat = (1.0 - chi_q_mass) / one_minus_chi;
    if (!(flat > 0))
        throw BadParams("blended density would not stay positive; shrink the cutoff band");

    RankInputs out;
    out.d = inputs.d;
    out.kappa = std::make_shared<BlendedCovariance>(inputs.kappa, theta, chi);
    out.q = std::make_shared<BlendedDensity>(inputs.q, flat, chi);
    out.tie_smooth = true;  // theta takes over near every rank tie
    return out;
}

namespace {

class SymmetrizedCovariance final : public CovarianceField {
  public:
    SymmetrizedCovariance(CovarianceFieldPtr kappa, bool tie_smooth)
        : kappa_(std::move(kappa)), tie_smooth_(tie_smooth) {}

    Mat value(const Vec& x) const override {
        const Ordering o = order(x);
        const Mat base = kappa_->value(o.sorted);
        const int d = int(x.size());
        Mat out(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) out(i, j) = base(o.rank_of[i], o.rank_of[j]);
        return out;
    }
    Mat partial_matrix(const Vec& x, int k) const override {
        const Ordering o = guarded_order(x);
        const Mat base = kappa_->partial_matrix(o.sorted, o.rank_of[k]);
        const int d = int(x.size());
        Mat out(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) out(i, j) = base(o.rank_of[i], o.rank_of[j]);
        return out;
    }
    Vec divergence(const Vec& x) const override {
        const Ordering o = guarded_order(x);
        const Vec base = kappa_->divergence(o.sorted);
        Vec out(x.size());
        for (int i = 0; i < x.size(); ++i) out[i] = base[o.rank_of[i]];
        return out;
    }
    double div_div(const Vec& x) const override {
        return kappa_->div_div(guarded_order(x).sorted);
    }

  private:
    Ordering guarded_order(const Vec& x) const {
        Ordering o = order(x);
        if (!tie_smooth_ && o.min_gap < 1e-9)
            throw TieDerivative("derivative requested at a rank tie of non-smooth inputs");
        return o;
    }
    CovarianceFieldPtr kappa_;
    bool tie_smooth_;
};

class SymmetrizedDensity final : public ScalarField {
  public:
    SymmetrizedDensity(ScalarFieldPtr q, int d, bool tie_smooth)
        : q_(std::move(q)), scale_(1.0), tie_smooth_(tie_smooth) {
        for (int k = 2; k <= d; ++k) scale_ *= k;
        scale_ = 1.0 / scale_;
    }
    double value(const Vec& x) const override { return scale_ * q_->value(order(x).sorted); }
    Vec gradient(const Vec& x) const override {
        const Ordering o = guarded_order(x);
        const Vec base = q_->gradient(o.sorted);
        Vec out(x.size());
        for (int i = 0; i < x.size(); ++i) out[i] = scale_ * base[o.rank_of[i]];
        return out;
    }
    Mat hessian(const Vec& x) const override {
        const Ordering o = guarded_order(x);
        const Mat base = q_->hessian(o.sorted);
        const int d = int(x.size());
        Mat out(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) out(i, j) = scale_ * base(o.rank_of[i], o.rank_of[j]);
        return out;
    }

  private:
    Ordering guarded_order(const Vec& x) const {
        Ordering o = order(x);
        if (!tie_smooth_ && o.min_gap < 1e-9)
            throw TieDerivative("derivative requested at a rank tie of non-smooth inputs");
        return o;
    }
    ScalarFieldPtr q_;
    double scale_;
    bool tie_smooth_;
};

}  // namespace

MarketModel symmetrize(const RankInputs& inputs, double mass_tolerance) {
    MarketModel m;
    m.domain = Domain::simplex(inputs.d);
    m.c = std::make_shared<SymmetrizedCovariance>(inputs.kappa, inputs.tie_smooth);
    m.p = std::make_shared<SymmetrizedDensity>(inputs.q, inputs.d, inputs.tie_smooth);
    m.mass_tolerance = mass_tolerance;
    m.name = "rank_symmetrized";
    return m;
}

double ordered_simplex_integrate(const Domain& dom, const FnV& f_ordered, double eps, int cells) {
    double fact = 1;
    for (int k = 2; k <= dom.ambient_dim(); ++k) fact *= k;
    auto f = [&](const Vec& x) { return f_ordered(order(x).sorted) / fact; };
    return simplex_slice_integrate(dom, f, eps, cells);
}

VectorFieldPtr boundary_strategy(const ThetaParams& params, int d) {
    const double k = params.strategy_exponent(d);
    return make_vector_field([k, d](const Vec& x) {
        Vec out(x.size());
        for (int i = 0; i < x.size(); ++i) out[i] = k / x[i] + (1.0 - k * d);
        return out;
    });
}

namespace {

// group-average of the solved potential over all coordinate permutations;
// exactly permutation invariant by construction
class PermutationAveragedPotential final : public ScalarField {
  public:
    PermutationAveragedPotential(std::shared_ptr<const variational::PotentialField> raw, int d)
        : raw_(std::move(raw)), d_(d) {
        std::array<int, kMaxDim> perm{};
        std::iota(perm.begin(), perm.begin() + d, 0);
        do {
            perms_.push_back(perm);
        } while (std::next_permutation(perm.begin(), perm.begin() + d));
    }

    double value(const Vec& x) const override {
        double s = 0;
        for (const auto& tau : perms_) s += raw_->value(apply(x, tau));
        return s / perms_.size();
    }
    Vec gradient(const Vec& x) const override {
        Vec g = Vec::Zero(d_);
        for (const auto& tau : perms_) {
            const Vec gp = raw_->gradient(apply(x, tau));
            // d/dx^i f(x_tau) = (d_a f)(x_tau) at the slot a with tau(a) = i
            for (int a = 0; a < d_; ++a) g[tau[a]] += gp[a];
        }
        return g / double(perms_.size());
    }
    Mat hessian(const Vec& x) const override {
        Mat h = Mat::Zero(d_, d_);
        for (const auto& tau : perms_) {
            const Mat hp = raw_->hessian(apply(x, tau));
            for (int a = 0; a < d_; ++a)
                for (int b = 0; b < d_; ++b) h(tau[a], tau[b]) += hp(a, b);
        }
        return h / double(perms_.size());
    }

  private:
    Vec apply(const Vec& x, const std::array<int, kMaxDim>& tau) const {
        Vec y(d_);
        for (int a = 0; a < d_; ++a) y[a] = x[tau[a]];
        return y;
    }
    std::shared_ptr<const variational::PotentialField> raw_;
    int d_;
    std::vector<std::array<int, kMaxDim>> perms_;
};

}  // namespace

RankResult rank_pipeline(const RankInputs& inputs, const RankOptions& opts) {
    RankResult result;
    MarketModel model = symmetrize(inputs);

    variational::SolveOptions vopts;
    vopts.grid_level = opts.grid_level;
    result.solution = variational::solve_model(model, vopts);

    auto raw = std::make_shared<variational::PotentialField>(model, result.solution.grid,
                                                             result.solution.potential.values);
    auto phi = std::make_shared<PermutationAveragedPotential>(raw, inputs.d);
    result.gen = generating_from_phi(phi);

    // both growth integrals on one shared masked lattice so the d! factor
    // cancels exactly
    const int cells = opts.quadrature_cells > 0 ? opts.quadrature_cells
                                                : (model.effective_dim() == 1 ? 1500 : 220);
    const double eps = model.domain.simplex_eps(result.solution.grid.exhaustion_level);
    auto strategy = result.gen.strategy;
    auto simplex_integrand = [&](const Vec& x) {
        const Vec s = strategy->value(x);
        return 0.5 * model.p->value(x) * double(s.dot(model.c->value(x) * s));
    };
    double fact = 1;
    for (int k = 2; k <= inputs.d; ++k) fact *= k;
    auto ordered_integrand = [&](const Vec& x) {
        const Ordering o = order(x);
        const Vec s = strategy->value(o.sorted);
        return (0.5 / fact) * inputs.q->value(o.sorted) *
               double(s.dot(inputs.kappa->value(o.sorted) * s));
    };
    result.lambda_simplex = simplex_slice_integrate(model.domain, simplex_integrand, eps, cells);
    result.lambda_ordered = simplex_slice_integrate(model.domain, ordered_integrand, eps, cells);

    result.report.classification = Classification::finite;
    result.report.method = "variational";
    result.report.lambda = result.lambda_simplex;
    CheckOptions copts;
    copts.skip_reversing = true;
    result.report.diagnostics = check_assumptions(model, copts);
    result.report.diagnostics.reversing.note =
        "certified empirically by the theta-market simulation";
    return result;
}

simulate::PathBundle simulate_theta_market(const ThetaParams& params, int d, double horizon,
                                           double dt, int n_paths, uint64_t seed, double floor) {
    auto theta = std::make_shared<ThetaCovariance>(params);
    auto drift = make_vector_field([theta](const Vec& x) { return Vec(0.5 * theta->divergence(x)); });
    simulate::SdeSpec spec;
    spec.drift = drift;
    spec.dispersion_of = theta;
    spec.x0 = Vec::Constant(d, 1.0 / d);
    spec.dt = dt;
    spec.horizon = horizon;
    spec.seed = seed;
    spec.simplex_mode = false;  // orthant diffusion: the component sum is not preserved
    spec.domain_lo = Vec::Constant(d, floor);
    spec.domain_hi = Vec::Constant(d, 1e9);
    spec.store_stride = 100;
    return simulate::simulate(spec, n_paths);
}

namespace {

// invariant density of the tangential theta market in d = 2:
// q proportional to exp(H) / ctilde on the ordered segment, where
// ctilde = (theta11 + theta22 - 2 theta12)/2 is the tangential variance
class ThetaInvariantDensityD2 final : public ScalarField {
  public:
    explicit ThetaInvariantDensityD2(const ThetaParams& params)
        : theta_(params), h_(params.A + params.C, 2), norm_(1.0) {
        norm_ = 1.0 / ordered_region_integrate(2, [&](const Vec& x) { return raw(x); });
    }

    double value(const Vec& x) const override { return norm_ * raw(x); }
    Vec gradient(const Vec& x) const override {
        // log q = log N + H - log ctilde
        return Vec(value(x) * dlog(x));
    }
    Mat hessian(const Vec& x) const override {
        const Vec dl = dlog(x);
        Mat h = h_.hessian(x) - ct_hess(x) / ct(x) + ct_grad(x) * ct_grad(x).transpose() / (ct(x) * ct(x));
        return Mat(value(x) * (dl * dl.transpose() + h));
    }

  private:
    double raw(const Vec& x) const { return std::exp(h_.value(x)) / ct(x); }
    Vec dlog(const Vec& x) const { return Vec(h_.gradient(x) - ct_grad(x) / ct(x)); }
    double ct(const Vec& x) const {
        const Mat t = theta_.value(x);
        return 0.5 * (t(0, 0) + t(1, 1) - 2 * t(0, 1));
    }
    Vec ct_grad(const Vec& x) const {
        Vec g(2);
        for (int k = 0; k < 2; ++k) {
            const Mat p = theta_.partial_matrix(x, k);
            g[k] = 0.5 * (p(0, 0) + p(1, 1) - 2 * p(0, 1));
        }
        return g;
    }
    Mat ct_hess(const Vec& x) const {
        Mat h(2, 2);
        for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l)
                h(k, l) = 0.5 * (theta_.second_partial(x, 0, 0, k, l) +
                                 theta_.second_partial(x, 1, 1, k, l) -
                                 2 * theta_.second_partial(x, 0, 1, k, l));
        return h;
    }

    ThetaCovariance theta_;
    ThetaPotential h_;
    double norm_;
};

// theta scaled by the smooth symmetric factor 1 + tilt * sum_i (x^i)^2
class TiltedThetaCovariance final : public CovarianceField {
  public:
    TiltedThetaCovariance(const ThetaParams& params, double tilt) : theta_(params), tilt_(tilt) {}
    Mat value(const Vec& x) const override { return Mat(theta_.value(x) * factor(x)); }
    Mat partial_matrix(const Vec& x, int k) const override {
        return Mat(theta_.partial_matrix(x, k) * factor(x) +
                   theta_.value(x) * (2 * tilt_ * x[k]));
    }
    Vec divergence(const Vec& x) const override {
        return Vec(theta_.divergence(x) * factor(x) + 2 * tilt_ * (theta_.value(x) * x));
    }
    double div_div(const Vec& x) const override {
        // sum_ij d_ij (theta^{ij} f) with f = 1 + tilt |x|^2
        double s = theta_.div_div(x) * factor(x);
        s += 4 * tilt_ * x.dot(theta_.divergence(x));
        s += 2 * tilt_ * theta_.value(x).trace();
        return s;
    }

  private:
    double factor(const Vec& x) const { return 1.0 + tilt_ * x.squaredNorm(); }
    ThetaCovariance theta_;
    double tilt_;
};

}  // namespace

RankInputs pure_theta_inputs_d2(const ThetaParams& params) {
    RankInputs in;
    in.d = 2;
    in.kappa = std::make_shared<ThetaCovariance>(params);
    in.q = std::make_shared<ThetaInvariantDensityD2>(params);
    in.tie_smooth = true;  // theta symmetrizes to itself
    return in;
}

RankInputs tilted_theta_inputs(int d, const ThetaParams& params, double tilt) {
    RankInputs in;
    in.d = d;
    in.kappa = std::make_shared<TiltedThetaCovariance>(params, tilt);
    double vol = std::sqrt(double(d));  // (d-1)-volume of the full simplex slice
    for (int k = 2; k <= d - 1; ++k) vol /= k;
    double fact = 1;
    for (int k = 2; k <= d; ++k) fact *= k;
    in.q = std::make_shared<UniformDensity>(d, vol / fact);
    in.tie_smooth = false;  // raw inputs; blend with modify() before use
    return in;
}

}  // namespace rank
}  // namespace rgo
