#include "rgo/diagnostics.hpp"

namespace rgo {

namespace {

double integrate_box_nd(const MarketModel& model, const FnV& f, const std::vector<double>& lo,
                        const std::vector<double>& hi, int cells) {
    (void)model;
    bool empty = false;
    for (size_t i = 0; i < lo.size(); ++i) empty = empty || !(lo[i] < hi[i]);
    if (empty) return 0.0;
    if (lo.size() == 1) {
        auto g = [&](double t) {
            Vec v(1);
            v[0] = t;
            return f(v);
        };
        return integrate_adaptive(g, lo[0], hi[0], 1e-10);
    }
    return midpoint_richardson_box(f, lo, hi, cells);
}

}  // namespace

std::vector<double> exhaustion_totals(const MarketModel& model, const FnV& f, int levels) {
    std::vector<double> totals;
    const auto kind = model.domain.kind();
    if (kind == DomainKind::simplex) {
        const int cells = model.effective_dim() == 1 ? 2000 : 200;
        for (int n = 1; n <= levels; ++n)
            totals.push_back(
                simplex_slice_integrate(model.domain, f, model.domain.simplex_eps(n), cells));
        return totals;
    }
    // interval/box: integrate E_1 once, then add annulus increments
    Truncation prev = model.domain.exhaustion(1);
    double total = integrate_box_nd(model, f, prev.lo, prev.hi, 96);
    totals.push_back(total);
    const int d = model.ambient_dim();
    for (int n = 2; n <= levels; ++n) {
        const Truncation cur = model.domain.exhaustion(n);
        if (d == 1) {
            total += integrate_box_nd(model, f, {cur.lo[0]}, {prev.lo[0]}, 0);
            total += integrate_box_nd(model, f, {prev.hi[0]}, {cur.hi[0]}, 0);
        } else {
            // frame between nested boxes, decomposed into side strips
            total += integrate_box_nd(model, f, {cur.lo[0], cur.lo[1]}, {prev.lo[0], cur.hi[1]}, 48);
            total += integrate_box_nd(model, f, {prev.hi[0], cur.lo[1]}, {cur.hi[0], cur.hi[1]}, 48);
            total += integrate_box_nd(model, f, {prev.lo[0], cur.lo[1]}, {prev.hi[0], prev.lo[1]}, 48);
            total += integrate_box_nd(model, f, {prev.lo[0], prev.hi[1]}, {prev.hi[0], cur.hi[1]}, 48);
        }
        totals.push_back(total);
        prev = cur;
    }
    return totals;
}

std::vector<double> endpoint_totals(const MarketModel& model, const Fn1& f, bool lower,
                                    int levels) {
    const Truncation t1 = model.domain.exhaustion(1);
    const double anchor = 0.5 * (t1.lo[0] + t1.hi[0]);
    std::vector<double> totals;
    double total = 0;
    double inner = anchor;
    for (int n = 1; n <= levels; ++n) {
        const Truncation t = model.domain.exhaustion(n);
        const double edge = lower ? t.lo[0] : t.hi[0];
        total += lower ? integrate_adaptive(f, edge, inner, 1e-9)
                       : integrate_adaptive(f, inner, edge, 1e-9);
        totals.push_back(total);
        inner = edge;
        if (total > 1e12) break;  // clearly divergent; avoid overflow deeper in
    }
    return totals;
}

double divergence_pcell(const MarketModel& model, const Vec& x) {
    const Mat cv = model.c->value(x);
    const Mat hp = model.p->hessian(x);
    const Vec dc = model.c->divergence(x);
    const Vec gp = model.p->gradient(x);
    return (cv * hp).trace() + 2.0 * dc.dot(gp) + model.p->value(x) * model.c->div_div(x);
}

Diagnostics check_assumptions(const MarketModel& model, const CheckOptions& opts) {
    const int levels = opts.levels > 0 ? opts.levels : model.domain.levels();
    Diagnostics diag;

    EffectiveModel eff(model);
    auto energy_integrand = [&](const Vec& x) {
        const Vec y = model.domain.to_slice(x);
        const Vec l = eff.ell(y);
        return double(l.dot(eff.covariance(y) * l)) * model.p->value(x);
    };
    auto flux_integrand = [&](const Vec& x) {
        return std::max(0.0, divergence_pcell(model, x));
    };

    {
        auto totals = exhaustion_totals(model, energy_integrand, levels);
        for (size_t i = 1; i < totals.size(); ++i)
            if (totals[i] - totals[i - 1] < -1e-9 * std::max(1.0, std::abs(totals[i])))
                throw GridTooCoarse("tail increments of the energy integral are non-monotone");
        auto v = classify_series(totals, opts.rel_tol, 1e-12, opts.cap);
        diag.energy = {v.converged, v.divergent, v.value, v.totals};
    }
    {
        auto totals = exhaustion_totals(model, flux_integrand, levels);
        auto v = classify_series(totals, opts.rel_tol, 1e-12, opts.cap);
        diag.flux_part = {v.converged, v.divergent, v.value, v.totals};
    }

    if (model.ambient_dim() == 1 && !opts.skip_reversing) {
        auto inv_pc = [&](double t) {
            Vec v(1);
            v[0] = t;
            const double pc = model.p->value(v) * model.c->value(v)(0, 0);
            return pc > 0 ? 1.0 / pc : 0.0;
        };
        auto verdict = [&](bool lower) {
            auto totals = endpoint_totals(model, inv_pc, lower, levels);
            auto v = classify_series(totals, opts.rel_tol, 1e-12, opts.cap);
            return !v.converged;  // infinite scale integral = good
        };
        diag.reversing.kind = ReversingDiagnostic::Kind::exact_1d;
        diag.reversing.lower_infinite = verdict(true);
        diag.reversing.upper_infinite = verdict(false);
        diag.reversing.pass = *diag.reversing.lower_infinite && *diag.reversing.upper_infinite;
    } else {
        diag.reversing.kind = ReversingDiagnostic::Kind::unknown;
        diag.reversing.note = "non-explosion requires a simulation check in d >= 2";
    }
    return diag;
}

}  // namespace rgo
