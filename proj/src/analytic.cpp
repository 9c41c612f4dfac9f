#include "rgo/analytic.hpp"

#include "rgo/simulate.hpp"
#include "rgo/variational.hpp"

#include <random>

namespace rgo {
namespace analytic {

namespace {

// deterministic interior sample points in a mid-level truncation
std::vector<Vec> sample_points(const MarketModel& model, int count, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int level = std::max(1, model.domain.levels() / 2);
    const Truncation t = model.domain.exhaustion(level);
    std::vector<Vec> pts;
    while (int(pts.size()) < count) {
        Vec y(model.effective_dim());
        for (int i = 0; i < y.size(); ++i) y[i] = t.lo[i] + (t.hi[i] - t.lo[i]) * unif(rng);
        Vec x = model.domain.to_ambient(y);
        if (model.is_simplex() && !model.domain.contains(x, level)) continue;
        pts.push_back(x);
    }
    return pts;
}

double quadrature_lambda_from_phi(const MarketModel& model, const ScalarField& phi, int levels) {
    EffectiveModel eff(model);
    auto integrand = [&](const Vec& x) {
        Vec g = phi.gradient(x);
        if (model.is_simplex()) {
            const Vec gy = model.domain.slice_basis().transpose() * g;
            const Vec y = model.domain.to_slice(x);
            return double(gy.dot(eff.covariance(y) * gy)) * model.p->value(x);
        }
        return double(g.dot(model.c->value(x) * g)) * model.p->value(x);
    };
    auto totals = exhaustion_totals(model, integrand, levels);
    return totals.back() / 8.0;
}

}  // namespace

std::pair<GeneratingFunction, GrowthReport> solve_one_dim(const MarketModel& model) {
    if (model.domain.kind() != DomainKind::interval)
        throw BadParams("solve_one_dim needs an interval domain");
    Diagnostics diag = check_assumptions(model);
    if (!diag.energy.pass) throw AssumptionViolated(1, "integral of ell' c ell p does not converge");
    if (!diag.flux_part.pass)
        throw AssumptionViolated(2, "integral of (div p c ell)^+ does not converge");
    if (!diag.reversing.pass)
        throw AssumptionViolated(3, "reversing diffusion explodes (scale measure finite)");

    GeneratingFunction gen;
    gen.phi = std::make_shared<LogPC1dField>(model.p, model.c);
    gen.u = std::make_shared<PowerPC1dField>(model.p, model.c, 0.5);
    gen.strategy = strategy_from_phi(gen.phi);

    GrowthReport rep;
    rep.classification = Classification::finite;
    rep.method = "closed_form_1d";
    rep.lambda = diag.energy.value / 8.0;  // ell = (pc)'/(pc) makes the two integrals equal
    rep.diagnostics = std::move(diag);
    return {std::move(gen), std::move(rep)};
}

std::pair<GeneratingFunction, GrowthReport> solve_gradient_case(const MarketModel& model,
                                                                ScalarFieldPtr h) {
    const auto pts = sample_points(model, 200, 20240601);
    double worst = 0;
    for (const Vec& x : pts) {
        const Vec dc = model.c->divergence(x);
        const Vec gh = h->gradient(x);
        double err;
        if (model.is_simplex()) {
            // ambient identity c grad H = div c (exact for the theta family)
            err = (model.c->value(x) * gh - dc).norm();
        } else {
            err = (model.c->value(x).llt().solve(dc) - gh).norm();
        }
        worst = std::max(worst, err);
    }
    if (worst > 1e-6)
        throw NotGradientCase("c^{-1} div c - grad H deviates by " + std::to_string(worst));

    GeneratingFunction gen;
    gen.phi = std::make_shared<LogPPlusHField>(model.p, h);
    gen.u = std::make_shared<ExpHalfPhiField>(gen.phi);
    gen.strategy = strategy_from_phi(gen.phi);

    GrowthReport rep;
    rep.classification = Classification::finite;
    rep.method = "gradient_case";
    rep.lambda = quadrature_lambda_from_phi(model, *gen.phi, model.domain.levels());
    rep.diagnostics = check_assumptions(model);
    if (model.is_simplex())
        rep.notes.push_back("gradient-case closed form on the simplex is diagnostic only");
    return {std::move(gen), std::move(rep)};
}

double candidate_growth(const MarketModel& model, const ScalarField& u) {
    auto positive_part = [&](const Vec& x) {
        return std::max(0.0, lc_over_u(model, u, x)) * model.p->value(x);
    };
    auto negative_part = [&](const Vec& x) {
        return std::max(0.0, -lc_over_u(model, u, x)) * model.p->value(x);
    };
    // extend past the bundled truncations: divergence has no finite certificate,
    // the tail-increment test needs room to make the call
    const int levels = model.domain.levels() + 8;
    auto pos = classify_series(exhaustion_totals(model, positive_part, levels));
    if (!pos.converged)
        throw NotInDomainD("(L^c u / u)^+ is not integrable against p; u is not admissible");
    auto neg = classify_series(exhaustion_totals(model, negative_part, levels));
    if (neg.divergent || !neg.converged)
        return std::numeric_limits<double>::infinity();
    return neg.value - pos.value;
}

GrowthReport classify(const MarketModel& model, const ClassifyOptions& opts) {
    GrowthReport rep;
    CheckOptions copts;
    copts.levels = opts.quadrature_levels;

    if (model.ambient_dim() == 1) {
        Diagnostics diag = check_assumptions(model, copts);
        // (a) finite scale measure at either endpoint: the robust problem is
        //     ill-posed (empty model class or infinite growth by dilation)
        if (!diag.reversing.pass) {
            rep.classification = Classification::ill_posed_or_empty;
            rep.method = "candidate_bound";
            rep.diagnostics = std::move(diag);
            rep.notes.push_back("scale measure of the reversing diffusion is finite at an endpoint");
            return rep;
        }
        // (b) the canonical candidate sqrt(pc) already certifies infinite growth
        try {
            PowerPC1dField u(model.p, model.c, 0.5);
            const double g = candidate_growth(model, u);
            if (std::isinf(g)) {
                rep.classification = Classification::infinite;
                rep.method = "candidate_bound";
                rep.diagnostics = std::move(diag);
                return rep;
            }
        } catch (const NotInDomainD&) {
            rep.notes.push_back("sqrt(pc) is not an admissible candidate");
        }
        // (c) closed form when every assumption holds
        if (diag.all_pass()) {
            auto [gen, inner] = solve_one_dim(model);
            (void)gen;
            inner.notes.insert(inner.notes.end(), rep.notes.begin(), rep.notes.end());
            return inner;
        }
        rep.classification = Classification::infinite;
        rep.method = "candidate_bound";
        rep.diagnostics = std::move(diag);
        rep.notes.push_back("assumptions failed without a certificate; treated as unbounded");
        return rep;
    }

    // d >= 2
    copts.skip_reversing = true;
    Diagnostics diag = check_assumptions(model, copts);
    if (opts.run_empirical_check) {
        diag.reversing = simulate::reversing_explosion_check(model);
    }
    if (diag.energy.pass && diag.flux_part.pass && diag.reversing.pass) {
        variational::SolveOptions vopts;
        vopts.grid_level = opts.grid_level;
        auto sol = variational::solve_model(model, vopts);
        rep.classification = Classification::finite;
        rep.method = "variational";
        rep.lambda = sol.lambda;
        rep.diagnostics = std::move(diag);
        return rep;
    }
    rep.classification = Classification::infinite;
    rep.method = "candidate_bound";
    rep.diagnostics = std::move(diag);
    rep.notes.push_back(
        "dichotomy unproven in d >= 2: assumptions fail but no infinite-growth certificate");
    return rep;
}

}  // namespace analytic
}  // namespace rgo
