#pragma once

#include "rgo/linalg.hpp"

#include <memory>

namespace rgo {

// Scalar coefficient field with analytic first and second derivatives.
// Implementations must be pure (safe to call concurrently after construction).
class ScalarField {
  public:
    virtual ~ScalarField() = default;
    virtual double value(const Vec& x) const = 0;
    virtual Vec gradient(const Vec& x) const = 0;
    virtual Mat hessian(const Vec& x) const = 0;
    virtual int smoothness() const { return 2; }
};

class VectorField {
  public:
    virtual ~VectorField() = default;
    virtual Vec value(const Vec& x) const = 0;
};

// Covariance field c : E -> S^d_++ (positive definite on the relevant
// tangent space). divergence() is (div c)^i = sum_j d_j c^ij and div_div()
// is sum_ij d_ij c^ij. Presets override the derivative members with closed
// forms; the finite-difference defaults are only a fallback for ad-hoc
// fields in tests.
class CovarianceField {
  public:
    virtual ~CovarianceField() = default;
    virtual Mat value(const Vec& x) const = 0;

    // d/dx_k of the whole matrix.
    virtual Mat partial_matrix(const Vec& x, int k) const {
        const double h = fd_step(x[k]);
        Vec xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        return (value(xp) - value(xm)) / (2 * h);
    }

    virtual Vec divergence(const Vec& x) const {
        const int d = int(x.size());
        Vec out = Vec::Zero(d);
        for (int k = 0; k < d; ++k) out += partial_matrix(x, k).col(k);
        return out;
    }

    virtual double div_div(const Vec& x) const {
        const int d = int(x.size());
        double s = 0;
        for (int k = 0; k < d; ++k) {
            const double h = fd_step(x[k]);
            Vec xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            s += (divergence(xp)[k] - divergence(xm)[k]) / (2 * h);
        }
        return s;
    }

    // Contraction v^i = sum_{j,k} B_{jk} d_k c^{ij}; with B = I this is the
    // plain divergence, with B = tangent projector it is the divergence seen
    // by the simplex slice coordinates.
    Vec directional_divergence(const Vec& x, const Mat& b) const {
        const int d = int(x.size());
        Vec out = Vec::Zero(d);
        for (int k = 0; k < d; ++k) {
            const Mat pk = partial_matrix(x, k);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) out[i] += b(j, k) * pk(i, j);
        }
        return out;
    }

    virtual Mat sqrt(const Vec& x) const { return psd_sqrt(value(x)); }

  protected:
    static double fd_step(double xk) { return 1e-5 * std::max(1.0, std::abs(xk)); }
};

using ScalarFieldPtr = std::shared_ptr<const ScalarField>;
using VectorFieldPtr = std::shared_ptr<const VectorField>;
using CovarianceFieldPtr = std::shared_ptr<const CovarianceField>;

// Adapter for strategy/drift fields built from closures.
template <typename F>
class FnVectorField final : public VectorField {
  public:
    explicit FnVectorField(F f) : f_(std::move(f)) {}
    Vec value(const Vec& x) const override { return f_(x); }

  private:
    F f_;
};

template <typename F>
VectorFieldPtr make_vector_field(F f) {
    return std::make_shared<FnVectorField<F>>(std::move(f));
}

}  // namespace rgo
