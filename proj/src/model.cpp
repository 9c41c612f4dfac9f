#include "rgo/model.hpp"

#include <random>

namespace rgo {

double density_mass(const MarketModel& model, int level) {
    const Truncation t = model.domain.exhaustion(level);
    switch (model.domain.kind()) {
        case DomainKind::interval: {
            auto f = [&](double x) {
                Vec v(1);
                v[0] = x;
                return model.p->value(v);
            };
            return integrate_adaptive(f, t.lo[0], t.hi[0], 1e-11);
        }
        case DomainKind::box: {
            auto f = [&](const Vec& x) { return model.p->value(x); };
            return midpoint_richardson_box(f, t.lo, t.hi, 192);
        }
        case DomainKind::simplex: {
            // by rank symmetry the full-simplex mass is d! times the ordered
            // integral of p; the truncation misses only an O(eps) band
            (void)t;
            double fact = 1;
            for (int k = 2; k <= model.ambient_dim(); ++k) fact *= k;
            auto f = [&](const Vec& x) { return fact * model.p->value(x); };
            return ordered_simplex_exact_integrate(model.ambient_dim(), f);
        }
    }
    return 0.0;
}

void validate_model(const MarketModel& model) {
    if (!model.c || !model.p) throw ConfigError("model is missing a coefficient field");
    const int levels = model.domain.levels();

    // spot checks on a deterministic sample of interior points
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const Truncation t1 = model.domain.exhaustion(std::max(1, levels / 2));
    EffectiveModel eff(model);
    for (int k = 0; k < 64; ++k) {
        Vec y(model.effective_dim());
        for (int i = 0; i < y.size(); ++i) y[i] = t1.lo[i] + (t1.hi[i] - t1.lo[i]) * unif(rng);
        Vec x = model.domain.to_ambient(y);
        if (model.is_simplex() && !model.domain.contains(x, std::max(1, levels / 2))) continue;
        if (!(model.p->value(x) > 0)) throw NonpositiveDensity("density must be positive on the domain");
        const Mat cv = model.c->value(x);
        if ((cv - cv.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, cv.cwiseAbs().maxCoeff()))
            throw SingularCovariance("covariance must be symmetric");
        eff.covariance(y);  // throws through ell() path users; here just exercise it
    }

    const double mass = density_mass(model, levels);
    if (mass > 1.0 + model.mass_tolerance || mass < 1.0 - model.mass_tolerance)
        throw ConfigError("density mass over the largest truncation is " + std::to_string(mass) +
                          ", outside tolerance");
}

Vec ell_at(const MarketModel& model, const Vec& x) {
    const double pv = model.p->value(x);
    if (!(pv > 0)) throw NonpositiveDensity("density not positive at queried point");
    if (!model.is_simplex()) {
        const Mat cv = model.c->value(x);
        Eigen::SelfAdjointEigenSolver<Mat> es(cv);
        const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
        if (!(lo > 0) || hi / lo > model.condition_cap)
            throw SingularCovariance("covariance is singular or badly conditioned");
        return model.p->gradient(x) / pv + cv.llt().solve(model.c->divergence(x));
    }
    // Tangent-space version: lift of the slice-coordinate ell, so 1'ell = 0.
    EffectiveModel eff(model);
    const Vec y = model.domain.to_slice(x);
    return model.domain.slice_basis() * eff.ell(y);
}

VectorFieldPtr ell_field(const MarketModel& model) {
    return make_vector_field([model](const Vec& x) { return ell_at(model, x); });
}

}  // namespace rgo
