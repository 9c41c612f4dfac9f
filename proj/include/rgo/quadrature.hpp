#pragma once

#include "rgo/domain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <vector>

namespace rgo {

using Fn1 = std::function<double(double)>;
using FnV = std::function<double(const Vec&)>;

namespace detail {

// Gauss 7 / Kronrod 15 pair on [-1, 1].
inline constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct GKResult {
    double integral = 0;
    double error = 0;
};

inline GKResult gk15(const Fn1& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double kron = 0, gauss = 0;
    for (int i = 0; i < 8; ++i) {
        const double t = kKronrodNodes[i];
        const double fsum = (i == 7) ? f(c) : f(c - h * t) + f(c + h * t);
        kron += kKronrodWeights[i] * fsum;
        // odd indices and the center are the embedded Gauss-7 nodes
        if (i == 1 || i == 3 || i == 5) gauss += kGaussWeights[i / 2] * fsum;
        if (i == 7) gauss += kGaussWeights[3] * fsum;
    }
    kron *= h;
    gauss *= h;
    GKResult r;
    r.integral = kron;
    r.error = std::pow(200.0 * std::abs(kron - gauss), 1.5);
    if (!std::isfinite(r.error)) r.error = std::abs(kron - gauss);
    return r;
}

}  // namespace detail

// Adaptive Gauss-Kronrod on a finite interval.
inline double integrate_adaptive(const Fn1& f, double a, double b, double rel_tol = 1e-10,
                                 double abs_tol = 1e-14, int max_splits = 2000) {
    if (a == b) return 0.0;
    struct Piece {
        double a, b, integral, error;
        bool operator<(const Piece& o) const { return error < o.error; }
    };
    auto eval = [&](double lo, double hi) {
        auto r = detail::gk15(f, lo, hi);
        return Piece{lo, hi, r.integral, r.error};
    };
    std::priority_queue<Piece> heap;
    heap.push(eval(a, b));
    double total = heap.top().integral, err = heap.top().error;
    for (int it = 0; it < max_splits; ++it) {
        if (err <= abs_tol + rel_tol * std::abs(total)) break;
        Piece worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {  // interval exhausted in double precision
            heap.push(Piece{worst.a, worst.b, worst.integral, 0.0});
            err -= worst.error;
            continue;
        }
        Piece l = eval(worst.a, mid), r = eval(mid, worst.b);
        total += l.integral + r.integral - worst.integral;
        err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
    }
    return total;
}

// Tensor-product midpoint rule with one Richardson step (h and h/2) on a box.
// This is the d>=2 workhorse; cells = per-axis count at the coarse level.
inline double midpoint_richardson_box(const FnV& f, const std::vector<double>& lo,
                                      const std::vector<double>& hi, int cells = 128) {
    const int d = int(lo.size());
    auto midpoint = [&](int m) {
        std::vector<double> h(d);
        for (int i = 0; i < d; ++i) h[i] = (hi[i] - lo[i]) / m;
        double vol = 1;
        for (int i = 0; i < d; ++i) vol *= h[i];
        std::vector<int> idx(d, 0);
        Vec x(d);
        double s = 0;
        while (true) {
            for (int i = 0; i < d; ++i) x[i] = lo[i] + (idx[i] + 0.5) * h[i];
            s += f(x);
            int k = 0;
            while (k < d && ++idx[k] == m) idx[k++] = 0;
            if (k == d) break;
        }
        return s * vol;
    };
    const double coarse = midpoint(cells), fine = midpoint(2 * cells);
    return (4.0 * fine - coarse) / 3.0;
}

// Integral over the simplex slice {x in simplex : min_i x^i >= eps} of an
// ambient-coordinate integrand, with respect to surface measure (the slice
// parametrization is isometric). Masked midpoint with one Richardson step.
inline double simplex_slice_integrate(const Domain& dom, const FnV& f, double eps,
                                      int cells = 200) {
    const int m = int(dom.slice_basis().rows());
    const int ed = dom.effective_dim();
    auto masked = [&](int n) {
        const double h = 2.0 / n;  // slice bounding box is [-1, 1]^ed
        std::vector<int> idx(ed, 0);
        Vec y(ed);
        double s = 0;
        while (true) {
            for (int i = 0; i < ed; ++i) y[i] = -1.0 + (idx[i] + 0.5) * h;
            Vec x = dom.to_ambient(y);
            double mn = x[0];
            for (int i = 1; i < m; ++i) mn = std::min(mn, x[i]);
            if (mn >= eps) s += f(x);
            int k = 0;
            while (k < ed && ++idx[k] == n) idx[k++] = 0;
            if (k == ed) break;
        }
        return s * std::pow(h, ed);
    };
    const double coarse = masked(cells), fine = masked(2 * cells);
    return (4.0 * fine - coarse) / 3.0;
}

// Exact-region quadrature over the ordered simplex {x^1 <= ... <= x^d} with
// respect to surface measure: adaptive Gauss-Kronrod on the d = 2 segment,
// composite midedge rule with one Richardson step on the d = 3 triangle.
inline double ordered_simplex_exact_integrate(int d, const FnV& f, int subdiv = 160) {
    if (d == 2) {
        auto g = [&](double t) {
            Vec x(2);
            x[0] = t;
            x[1] = 1 - t;
            return f(x) * std::sqrt(2.0);
        };
        return integrate_adaptive(g, 0.0, 0.5, 1e-10);
    }
    if (d != 3) throw std::invalid_argument("ordered-simplex quadrature supports d = 2 and 3");
    Vec v0(3), v1(3), v2(3);
    v0 << 0, 0, 1;
    v1 << 0, 0.5, 0.5;
    v2 << 1.0 / 3, 1.0 / 3, 1.0 / 3;
    const Vec e1 = v1 - v0, e2 = v2 - v0;
    Eigen::Vector3d a(e1[0], e1[1], e1[2]), b(e2[0], e2[1], e2[2]);
    const double jac = a.cross(b).norm();
    auto sample = [&](int n) {
        double s = 0;
        const double h = 1.0 / n;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j + i < n; ++j) {
                const double a0 = i * h, b0 = j * h;
                const double lo[3][2] = {
                    {a0 + h / 2, b0}, {a0, b0 + h / 2}, {a0 + h / 2, b0 + h / 2}};
                for (auto& pt : lo) s += f(Vec(v0 + pt[0] * e1 + pt[1] * e2)) * (h * h / 6);
                if (j + i + 1 < n) {
                    const double hi[3][2] = {
                        {a0 + h, b0 + h / 2}, {a0 + h / 2, b0 + h}, {a0 + h / 2, b0 + h / 2}};
                    for (auto& pt : hi) s += f(Vec(v0 + pt[0] * e1 + pt[1] * e2)) * (h * h / 6);
                }
            }
        return s * jac;
    };
    const double coarse = sample(subdiv), fine = sample(2 * subdiv);
    return (4 * fine - coarse) / 3;
}

// Convergence/divergence classification of an exhaustion-indexed series of
// cumulative integrals I_1, I_2, ... of a nonnegative integrand.
struct SeriesVerdict {
    std::vector<double> totals;
    double value = 0;       // last total
    bool converged = false;
    bool divergent = false;  // monotone growth without decay of increments, or cap hit
};

inline SeriesVerdict classify_series(const std::vector<double>& totals, double rel_tol = 1e-7,
                                     double abs_tol = 1e-12, double cap = 1e6) {
    SeriesVerdict v;
    v.totals = totals;
    v.value = totals.empty() ? 0.0 : totals.back();
    const int n = int(totals.size());
    if (n < 2) return v;
    std::vector<double> inc(n - 1);
    for (int i = 0; i + 1 < n; ++i) inc[i] = totals[i + 1] - totals[i];
    const double scale = std::max(std::abs(v.value), 1.0);
    if (v.value > cap) {
        v.divergent = true;
        return v;
    }
    const double last = std::abs(inc.back());
    if (last <= abs_tol + rel_tol * scale) {
        v.converged = true;
        return v;
    }
    // Geometric-tail test on the trailing increments.
    if (n >= 4) {
        const double r1 = std::abs(inc[n - 2]) > 0 ? last / std::abs(inc[n - 2]) : 0.0;
        const double r2 = std::abs(inc[n - 3]) > 0 ? std::abs(inc[n - 2]) / std::abs(inc[n - 3]) : 0.0;
        const double r = std::max(r1, r2);
        if (r < 0.75) {
            const double tail = last * r / (1.0 - r);
            if (tail <= abs_tol + 100 * rel_tol * scale) v.converged = true;
            return v;
        }
        v.divergent = true;  // increments not decaying
    }
    return v;
}

}  // namespace rgo
