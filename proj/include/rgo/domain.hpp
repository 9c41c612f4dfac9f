#pragma once

#include "rgo/linalg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace rgo {

enum class DomainKind { interval, box, simplex };

struct AxisInterval {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    // First exhaustion margins. For a finite endpoint the level-n truncation
    // pulls in by margin0 / 2^(n-1); for an infinite endpoint the truncation
    // sits at base0 * 2^(n-1) (sign taken from the side).
    double lower_margin0 = 0.0;
    double upper_margin0 = 0.0;
};

// Compact truncation of one exhaustion level: a box in the effective
// coordinates (axis bounds for interval/box, min-coordinate cut for simplex).
struct Truncation {
    std::vector<double> lo, hi;  // per effective axis
    double simplex_eps = 0.0;    // min_i x^i >= eps (simplex only)
};

// State domain E with its exhaustion E_1 c E_2 c ... . Interval and Box are
// ambient; Simplex is the open unit simplex in R^d handled through the
// zero-sum tangent space (slice coordinates around the barycenter).
class Domain {
  public:
    static Domain interval(AxisInterval axis, int levels = 12) {
        Domain d;
        d.kind_ = DomainKind::interval;
        d.axes_ = {axis};
        d.levels_ = levels;
        d.validate();
        return d;
    }

    static Domain box(std::vector<AxisInterval> axes, int levels = 12) {
        Domain d;
        d.kind_ = DomainKind::box;
        d.axes_ = std::move(axes);
        d.levels_ = levels;
        d.validate();
        return d;
    }

    static Domain simplex(int dim, double eps0 = 0.1, int levels = 12) {
        if (dim < 2 || dim > kMaxDim) throw std::invalid_argument("simplex dimension out of range");
        Domain d;
        d.kind_ = DomainKind::simplex;
        d.dim_ = dim;
        d.eps0_ = eps0;
        d.levels_ = levels;
        d.slice_basis_ = zero_sum_basis(dim);
        return d;
    }

    DomainKind kind() const { return kind_; }
    int levels() const { return levels_; }

    // Dimension of the ambient space points live in.
    int ambient_dim() const { return kind_ == DomainKind::simplex ? dim_ : int(axes_.size()); }
    // Dimension of the coordinates the PDE/quadrature actually run in.
    int effective_dim() const { return kind_ == DomainKind::simplex ? dim_ - 1 : int(axes_.size()); }

    const std::vector<AxisInterval>& axes() const { return axes_; }

    // n is 1-based; n = levels() is the largest bundled truncation.
    Truncation exhaustion(int n) const {
        if (n < 1) throw std::invalid_argument("exhaustion level must be >= 1");
        Truncation t;
        if (kind_ == DomainKind::simplex) {
            t.simplex_eps = eps0_ / std::pow(2.0, n - 1);
            slice_bounds(t.simplex_eps, t.lo, t.hi);
            return t;
        }
        const double shrink = std::pow(2.0, n - 1);
        for (const auto& ax : axes_) {
            double lo, hi;
            if (std::isfinite(ax.lower))
                lo = ax.lower + ax.lower_margin0 / shrink;
            else
                lo = -ax.lower_margin0 * shrink;
            if (std::isfinite(ax.upper))
                hi = ax.upper - ax.upper_margin0 / shrink;
            else
                hi = ax.upper_margin0 * shrink;
            if (!(lo < hi)) throw std::runtime_error("exhaustion element is empty");
            t.lo.push_back(lo);
            t.hi.push_back(hi);
        }
        return t;
    }

    bool contains(const Vec& x) const {
        if (kind_ == DomainKind::simplex) {
            if (x.size() != dim_) return false;
            double s = 0, mn = std::numeric_limits<double>::infinity();
            for (int i = 0; i < dim_; ++i) {
                s += x[i];
                mn = std::min(mn, x[i]);
            }
            return mn > 0 && std::abs(s - 1.0) <= 1e-12;
        }
        for (int i = 0; i < int(axes_.size()); ++i)
            if (!(x[i] > axes_[i].lower && x[i] < axes_[i].upper)) return false;
        return true;
    }

    // Membership in the closed exhaustion element n (points in ambient coords).
    bool contains(const Vec& x, int n) const {
        if (kind_ == DomainKind::simplex) {
            const double eps = eps0_ / std::pow(2.0, n - 1);
            double s = 0, mn = std::numeric_limits<double>::infinity();
            for (int i = 0; i < x.size(); ++i) {
                s += x[i];
                mn = std::min(mn, x[i]);
            }
            return mn >= eps && std::abs(s - 1.0) <= 1e-9;
        }
        const Truncation t = exhaustion(n);
        for (int i = 0; i < int(t.lo.size()); ++i)
            if (!(x[i] >= t.lo[i] && x[i] <= t.hi[i])) return false;
        return true;
    }

    // --- simplex slice parametrization: x = barycenter + M y ---

    const Mat& slice_basis() const { return slice_basis_; }

    Vec barycenter() const { return Vec::Constant(dim_, 1.0 / dim_); }

    Vec to_ambient(const Vec& y) const {
        if (kind_ != DomainKind::simplex) return y;
        return barycenter() + slice_basis_ * y;
    }

    Vec to_slice(const Vec& x) const {
        if (kind_ != DomainKind::simplex) return x;
        return slice_basis_.transpose() * (x - barycenter());
    }

    double simplex_eps(int n) const { return eps0_ / std::pow(2.0, n - 1); }

  private:
    void validate() const {
        if (axes_.empty() || int(axes_.size()) > kMaxDim)
            throw std::invalid_argument("domain dimension out of range");
        for (const auto& ax : axes_) {
            if (!(ax.lower < ax.upper)) throw std::invalid_argument("axis lower must be < upper");
            const bool flo = std::isfinite(ax.lower), fhi = std::isfinite(ax.upper);
            if (flo && ax.lower_margin0 <= 0) throw std::invalid_argument("finite endpoint needs a positive margin");
            if (!flo && ax.lower_margin0 <= 0) throw std::invalid_argument("infinite endpoint needs a positive base");
            if (fhi && ax.upper_margin0 <= 0) throw std::invalid_argument("finite endpoint needs a positive margin");
            if (!fhi && ax.upper_margin0 <= 0) throw std::invalid_argument("infinite endpoint needs a positive base");
            if (flo && fhi && ax.lower_margin0 + ax.upper_margin0 >= ax.upper - ax.lower)
                throw std::invalid_argument("margins exceed axis length");
        }
    }

    // Bounding box of {y : min_i x(y)_i >= eps} in slice coordinates.
    void slice_bounds(double eps, std::vector<double>& lo, std::vector<double>& hi) const {
        // The set is a scaled copy of the simplex slice polytope; the loose
        // bounding box max|y| <= 1 suffices for lattice construction (points
        // are masked by the eps test anyway).
        lo.assign(dim_ - 1, -1.0);
        hi.assign(dim_ - 1, 1.0);
        (void)eps;
    }

    DomainKind kind_ = DomainKind::interval;
    std::vector<AxisInterval> axes_;
    int dim_ = 1;       // simplex ambient dimension
    double eps0_ = 0.1; // simplex first-level cut
    int levels_ = 12;
    Mat slice_basis_;
};

}  // namespace rgo
