#include "rgo/simulate.hpp"

#include "rgo/preset_fields.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>
#include <thread>

namespace rgo {
namespace simulate {

VectorFieldPtr worst_case_drift(const MarketModel& model, const GeneratingFunction& gen) {
    auto strategy = gen.strategy;
    auto c = model.c;
    const bool simplex = model.is_simplex();
    const int d = model.ambient_dim();
    return make_vector_field([strategy, c, simplex, d](const Vec& x) {
        Vec v = c->value(x) * strategy->value(x);
        if (simplex) v = zero_sum_projector(d) * v;
        return v;
    });
}

VectorFieldPtr reversing_drift(const MarketModel& model) {
    if (!model.is_simplex()) {
        auto c = model.c;
        auto p = model.p;
        return make_vector_field([c, p](const Vec& x) {
            return Vec(0.5 * (c->value(x) * p->gradient(x) / p->value(x) + c->divergence(x)));
        });
    }
    // reduced reversing drift, lifted back to ambient coordinates
    auto modelc = model;
    return make_vector_field([modelc](const Vec& x) {
        EffectiveModel eff(modelc);
        const Vec y = modelc.domain.to_slice(x);
        const Vec by = 0.5 * (eff.covariance(y) * eff.density_gradient(y) / eff.density(y) +
                              eff.covariance_divergence(y));
        return Vec(modelc.domain.slice_basis() * by);
    });
}

VectorFieldPtr perturbed_drift(const MarketModel& model, const VectorFieldPtr& gamma) {
    // divergence-free spot check by central differences
    Rng rng(424242);
    const int level = std::max(1, model.domain.levels() / 2);
    const Truncation t = model.domain.exhaustion(level);
    const int d = model.ambient_dim();
    for (int k = 0; k < 200; ++k) {
        Vec x(d);
        for (int i = 0; i < d; ++i) x[i] = t.lo[i] + (t.hi[i] - t.lo[i]) * rng.uniform();
        double div = 0;
        for (int i = 0; i < d; ++i) {
            const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
            Vec xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            div += (gamma->value(xp)[i] - gamma->value(xm)[i]) / (2 * h);
        }
        if (std::abs(div) > 1e-6)
            throw NotDivergenceFree("perturbation flux has divergence " + std::to_string(div));
    }
    auto base = reversing_drift(model);
    auto p = model.p;
    return make_vector_field([base, gamma, p](const Vec& x) {
        return Vec(base->value(x) + gamma->value(x) / p->value(x));
    });
}

SdeSpec make_spec(const MarketModel& model, VectorFieldPtr drift, const Vec& x0, double dt,
                  double horizon, uint64_t seed) {
    SdeSpec spec;
    spec.drift = std::move(drift);
    spec.dispersion_of = model.c;
    spec.x0 = x0;
    spec.dt = dt;
    spec.horizon = horizon;
    spec.seed = seed;
    spec.guard_level = model.domain.levels();
    spec.simplex_mode = model.is_simplex();
    const Truncation t = model.domain.exhaustion(spec.guard_level);
    if (!model.is_simplex()) {
        Vec lo(int(t.lo.size())), hi(int(t.hi.size()));
        for (size_t i = 0; i < t.lo.size(); ++i) {
            lo[i] = t.lo[i];
            hi[i] = t.hi[i];
        }
        spec.domain_lo = lo;
        spec.domain_hi = hi;
    } else {
        spec.domain_lo = Vec::Constant(model.ambient_dim(), t.simplex_eps);
    }
    if (!(dt > 0) || dt > horizon) throw BadParams("need 0 < dt <= horizon");
    return spec;
}

Vec sample_stationary(const MarketModel& model, Rng& rng) {
    // direct samplers for the bundled density families
    if (auto g = std::dynamic_pointer_cast<const GammaDensity>(model.p)) {
        Vec x(1);
        x[0] = rng.gamma(g->shape(), g->rate());
        return x;
    }
    if (std::dynamic_pointer_cast<const Gauss1dDensity>(model.p)) {
        Vec x(1);
        x[0] = rng.normal();
        return x;
    }
    if (std::dynamic_pointer_cast<const GaussProductDensity>(model.p)) {
        Vec x(model.ambient_dim());
        for (int i = 0; i < x.size(); ++i) x[i] = rng.normal();
        return x;
    }
    // rejection against the level-3 truncation box
    const int level = std::min(3, model.domain.levels());
    const Truncation t = model.domain.exhaustion(level);
    double pmax = 0;
    const int d = model.effective_dim();
    for (int k = 0; k < 4096; ++k) {
        Vec y(d);
        for (int i = 0; i < d; ++i)
            y[i] = t.lo[i] + (t.hi[i] - t.lo[i]) * ((k + 0.5) / 4096.0 + 0.61803 * i);
        for (int i = 0; i < d; ++i) y[i] = t.lo[i] + std::fmod(y[i] - t.lo[i], t.hi[i] - t.lo[i]);
        const Vec x = model.domain.to_ambient(y);
        if (model.is_simplex() && !model.domain.contains(x, level)) continue;
        pmax = std::max(pmax, model.p->value(x));
    }
    pmax *= 1.3;
    for (int tries = 0; tries < 100000; ++tries) {
        Vec y(d);
        for (int i = 0; i < d; ++i) y[i] = t.lo[i] + (t.hi[i] - t.lo[i]) * rng.uniform();
        const Vec x = model.domain.to_ambient(y);
        if (model.is_simplex() && !model.domain.contains(x, level)) continue;
        if (rng.uniform() * pmax <= model.p->value(x)) return x;
    }
    throw NumericalError("stationary-start rejection sampler failed");
}

namespace {

Path run_single_path(const SdeSpec& spec, int path_index) {
    const int d = int(spec.x0.size());
    const int n_steps = int(std::llround(spec.horizon / spec.dt));
    Rng rng(spec.seed, uint64_t(path_index));
    Path path;
    path.dim = d;
    path.states.reserve(size_t(n_steps / spec.store_stride + 2) * d);
    Vec x = spec.x0;
    auto store = [&](const Vec& v) {
        for (int i = 0; i < d; ++i) path.states.push_back(v[i]);
    };
    store(x);
    const double sqrt_dt = std::sqrt(spec.dt);
    const Mat proj = spec.simplex_mode ? zero_sum_projector(d) : Mat();
    Vec z(d), w(d);
    for (int k = 0; k < n_steps; ++k) {
        const Vec b = spec.drift->value(x);
        // tangent-space dispersion on the simplex: the ambient symmetrized
        // covariance is only PD on the zero-sum subspace
        const Mat sigma = spec.simplex_mode
                              ? psd_sqrt(Mat(proj * spec.dispersion_of->value(x) * proj))
                              : spec.dispersion_of->sqrt(x);
        for (int i = 0; i < d; ++i) z[i] = rng.normal();
        w = sigma * z;
        if (spec.simplex_mode) {
            const double mean = w.sum() / d;
            for (int i = 0; i < d; ++i) w[i] -= mean;
        }
        x = x + b * spec.dt + w * sqrt_dt;
        if (spec.simplex_mode) {
            const double s = x.sum();
            if (s > 0) x /= s;
        }
        bool inside = true;
        if (spec.simplex_mode) {
            inside = x.minCoeff() >= (*spec.domain_lo)[0];
        } else {
            for (int i = 0; i < d && inside; ++i)
                inside = x[i] >= (*spec.domain_lo)[i] && x[i] <= (*spec.domain_hi)[i];
        }
        if (!inside || !x.allFinite()) {
            path.exploded = true;
            path.exit_time = (k + 1) * spec.dt;
            store(x);
            return path;
        }
        if ((k + 1) % spec.store_stride == 0) store(x);
    }
    path.exit_time = spec.horizon;
    return path;
}

}  // namespace

PathBundle simulate(const SdeSpec& spec, int n_paths) {
    PathBundle bundle;
    bundle.dt = spec.dt;
    bundle.horizon = spec.horizon;
    bundle.seed = spec.seed;
    bundle.dim = int(spec.x0.size());
    bundle.store_stride = spec.store_stride;
    bundle.paths.resize(n_paths);

    const unsigned workers =
        std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()), n_paths);
    if (workers <= 1 || n_paths == 1) {
        for (int i = 0; i < n_paths; ++i) bundle.paths[i] = run_single_path(spec, i);
    } else {
        std::vector<std::future<Path>> futs;
        futs.reserve(n_paths);
        for (int i = 0; i < n_paths; ++i)
            futs.push_back(std::async(std::launch::async, run_single_path, std::cref(spec), i));
        for (int i = 0; i < n_paths; ++i) bundle.paths[i] = futs[i].get();
    }

    int early = 0;
    for (const auto& p : bundle.paths)
        if (p.exploded && p.exit_time < spec.horizon / 2) ++early;
    if (early == n_paths)
        throw AllPathsExploded("all " + std::to_string(n_paths) +
                               " paths exited the guard region before half the horizon");
    return bundle;
}

WealthSeries wealth(const PathBundle& bundle, const GeneratingFunction& gen,
                    const MarketModel& model, const WealthOptions& opts) {
    WealthSeries ws;
    const double dt = bundle.stored_dt();
    std::vector<double> all_batches;
    for (const auto& path : bundle.paths) {
        if (path.exploded) continue;
        const int n = path.n_stored();
        std::vector<double> log_ito(n, 0.0);
        double func_integral = 0;
        Vec x = path.at(0);
        const double u0 = gen.u->value(x);
        for (int k = 0; k + 1 < n; ++k) {
            const Vec xk = path.at(k);
            const Vec xk1 = path.at(k + 1);
            const Vec theta = gen.strategy->value(xk);
            const Mat c = model.c->value(xk);
            log_ito[k + 1] = log_ito[k] + theta.dot(xk1 - xk) - 0.5 * theta.dot(c * theta) * dt;
            func_integral += lc_over_u(model, *gen.u, xk) * dt;
        }
        const double t_final = (n - 1) * dt;
        const double term_func = std::log(gen.u->value(path.at(n - 1)) / u0) - func_integral;
        ws.terminal_ito.push_back(log_ito.back());
        ws.terminal_functional.push_back(term_func);
        ws.growth_estimate.push_back(log_ito.back() / t_final);
        ws.max_terminal_gap = std::max(ws.max_terminal_gap, std::abs(log_ito.back() - term_func));

        const int burn = int(opts.burn_in_fraction * (n - 1));
        const int usable = (n - 1) - burn;
        const int nb = opts.batches_per_path;
        if (usable >= 2 * nb) {
            for (int b = 0; b < nb; ++b) {
                const int k0 = burn + (usable * b) / nb;
                const int k1 = burn + (usable * (b + 1)) / nb;
                all_batches.push_back((log_ito[k1] - log_ito[k0]) / ((k1 - k0) * dt));
            }
        }
    }
    ws.batch_means = all_batches;
    ws.n_batches = int(all_batches.size());
    if (!all_batches.empty()) {
        const double mean = std::accumulate(all_batches.begin(), all_batches.end(), 0.0) /
                            all_batches.size();
        double var = 0;
        for (double b : all_batches) var += (b - mean) * (b - mean);
        var /= std::max<size_t>(1, all_batches.size() - 1);
        ws.pooled_growth = mean;
        ws.ci_half_width = t_quantile_975(int(all_batches.size()) - 1) *
                           std::sqrt(var / all_batches.size());
    }
    return ws;
}

OccupancyHistogram occupancy(const PathBundle& bundle, const MarketModel& model,
                             const OccupancyOptions& opts) {
    OccupancyHistogram hist;
    hist.dim = bundle.dim;
    hist.bins_per_axis = opts.bins_per_axis;
    Vec lo, hi;
    if (opts.lo && opts.hi) {
        lo = *opts.lo;
        hi = *opts.hi;
    } else {
        // smallest bundled truncation holding 99.9% of the density mass
        int level = model.domain.levels();
        for (int n = 1; n <= model.domain.levels(); ++n)
            if (density_mass(model, n) >= 0.999) {
                level = n;
                break;
            }
        const Truncation t = model.domain.exhaustion(level);
        lo.resize(int(t.lo.size()));
        hi.resize(int(t.hi.size()));
        for (size_t i = 0; i < t.lo.size(); ++i) {
            lo[i] = t.lo[i];
            hi[i] = t.hi[i];
        }
    }
    const int d = bundle.dim;
    const int nb = opts.bins_per_axis;
    const int total_bins = d == 1 ? nb : nb * nb;
    hist.empirical.assign(total_bins, 0.0);
    hist.reference.assign(total_bins, 0.0);
    for (int i = 0; i < d; ++i)
        for (int b = 0; b < nb; ++b) {
            hist.edges_lo.push_back(lo[i] + (hi[i] - lo[i]) * b / nb);
            hist.edges_hi.push_back(lo[i] + (hi[i] - lo[i]) * (b + 1) / nb);
        }

    // reference masses by quadrature of p per bin
    if (d == 1) {
        for (int b = 0; b < nb; ++b) {
            auto f = [&](double t) {
                Vec v(1);
                v[0] = t;
                return model.p->value(v);
            };
            hist.reference[b] = integrate_adaptive(f, hist.edges_lo[b], hist.edges_hi[b], 1e-9);
        }
    } else {
        auto f = [&](const Vec& x) { return model.p->value(x); };
        for (int bx = 0; bx < nb; ++bx)
            for (int by = 0; by < nb; ++by) {
                std::vector<double> blo = {hist.edges_lo[bx], hist.edges_lo[nb + by]};
                std::vector<double> bhi = {hist.edges_hi[bx], hist.edges_hi[nb + by]};
                hist.reference[bx * nb + by] = midpoint_richardson_box(f, blo, bhi, 8);
            }
    }
    hist.outside_reference =
        std::max(0.0, 1.0 - std::accumulate(hist.reference.begin(), hist.reference.end(), 0.0));

    size_t used = 0, outside = 0;
    for (const auto& path : bundle.paths) {
        if (path.exploded) continue;
        const int n = path.n_stored();
        const int burn = int(opts.burn_in_fraction * n);
        for (int k = burn; k < n; ++k) {
            const Vec x = path.at(k);
            bool in = true;
            int flat = 0;
            for (int i = 0; i < d; ++i) {
                const int b = int((x[i] - lo[i]) / (hi[i] - lo[i]) * nb);
                if (b < 0 || b >= nb) {
                    in = false;
                    break;
                }
                flat = flat * nb + b;
            }
            ++used;
            if (in)
                hist.empirical[flat] += 1.0;
            else
                ++outside;
        }
    }
    if (used > 0) {
        for (double& e : hist.empirical) e /= double(used);
        hist.outside_empirical = double(outside) / double(used);
    }
    double tv = std::abs(hist.outside_empirical - hist.outside_reference);
    for (int b = 0; b < total_bins; ++b) tv += std::abs(hist.empirical[b] - hist.reference[b]);
    hist.tv_distance = 0.5 * tv;
    return hist;
}

ReversingDiagnostic reversing_explosion_check(const MarketModel& model, double horizon,
                                              int n_paths, uint64_t seed) {
    ReversingDiagnostic diag;
    diag.kind = ReversingDiagnostic::Kind::empirical;
    Vec x0;
    if (model.is_simplex()) {
        x0 = model.domain.barycenter();
    } else {
        const Truncation t = model.domain.exhaustion(1);
        x0.resize(int(t.lo.size()));
        for (size_t i = 0; i < t.lo.size(); ++i) x0[i] = 0.5 * (t.lo[i] + t.hi[i]);
    }
    SdeSpec spec = make_spec(model, reversing_drift(model), x0, 1e-3, horizon, seed);
    spec.store_stride = 1000;
    PathBundle bundle;
    try {
        bundle = simulate(spec, n_paths);
    } catch (const AllPathsExploded&) {
        diag.pass = false;
        diag.note = "all reversing paths exited the guard region";
        return diag;
    }
    diag.pass = bundle.n_exploded() == 0;
    diag.note = std::to_string(bundle.n_exploded()) + "/" + std::to_string(n_paths) +
                " reversing paths exploded over horizon " + std::to_string(horizon);
    return diag;
}

double t_quantile_975(int dof) {
    const double z = 1.959963984540054;
    if (dof <= 0) return z;
    const double nu = dof;
    const double z3 = z * z * z, z5 = z3 * z * z;
    return z + (z3 + z) / (4 * nu) + (5 * z5 + 16 * z3 + 3 * z) / (96 * nu * nu);
}

void write_paths_csv(const std::string& path, const PathBundle& bundle, int max_rows_per_path) {
    std::ofstream out(path);
    out << "path,t";
    for (int i = 0; i < bundle.dim; ++i) out << ",x" << i + 1;
    out << ",exploded\n";
    for (size_t pi = 0; pi < bundle.paths.size(); ++pi) {
        const auto& p = bundle.paths[pi];
        const int n = p.n_stored();
        const int stride = std::max(1, n / max_rows_per_path);
        for (int k = 0; k < n; k += stride) {
            out << pi << ',' << k * bundle.stored_dt();
            const Vec x = p.at(k);
            for (int i = 0; i < bundle.dim; ++i) out << ',' << x[i];
            out << ',' << (p.exploded ? 1 : 0) << '\n';
        }
    }
}

void write_wealth_csv(const std::string& path, const PathBundle& bundle,
                      const GeneratingFunction& gen, const MarketModel& model,
                      int max_rows_per_path) {
    std::ofstream out(path);
    out << "path,t,log_wealth_ito,log_wealth_functional\n";
    const double dt = bundle.stored_dt();
    for (size_t pi = 0; pi < bundle.paths.size(); ++pi) {
        const auto& p = bundle.paths[pi];
        if (p.exploded) continue;
        const int n = p.n_stored();
        const int stride = std::max(1, n / max_rows_per_path);
        double ito = 0, func_int = 0;
        const double u0 = gen.u->value(p.at(0));
        for (int k = 0; k + 1 < n; ++k) {
            const Vec xk = p.at(k), xk1 = p.at(k + 1);
            const Vec theta = gen.strategy->value(xk);
            ito += theta.dot(xk1 - xk) - 0.5 * theta.dot(model.c->value(xk) * theta) * dt;
            func_int += lc_over_u(model, *gen.u, xk) * dt;
            if ((k + 1) % stride == 0)
                out << pi << ',' << (k + 1) * dt << ',' << ito << ','
                    << std::log(gen.u->value(xk1) / u0) - func_int << '\n';
        }
    }
}

void write_occupancy_csv(const std::string& path, const OccupancyHistogram& hist) {
    std::ofstream out(path);
    if (hist.dim == 1) {
        out << "bin_lo,bin_hi,empirical,reference\n";
        for (size_t b = 0; b < hist.empirical.size(); ++b)
            out << hist.edges_lo[b] << ',' << hist.edges_hi[b] << ',' << hist.empirical[b] << ','
                << hist.reference[b] << '\n';
    } else {
        const int nb = hist.bins_per_axis;
        out << "x_lo,x_hi,y_lo,y_hi,empirical,reference\n";
        for (int bx = 0; bx < nb; ++bx)
            for (int by = 0; by < nb; ++by)
                out << hist.edges_lo[bx] << ',' << hist.edges_hi[bx] << ',' << hist.edges_lo[nb + by]
                    << ',' << hist.edges_hi[nb + by] << ',' << hist.empirical[bx * nb + by] << ','
                    << hist.reference[bx * nb + by] << '\n';
    }
    out << "# outside," << hist.outside_empirical << ',' << hist.outside_reference << '\n';
    out << "# tv_distance," << hist.tv_distance << '\n';
}

}  // namespace simulate
}  // namespace rgo
