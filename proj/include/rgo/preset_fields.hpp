#pragma once

#include "rgo/errors.hpp"
#include "rgo/field.hpp"

#include <cmath>
#include <vector>

namespace rgo {

// ---------------------------------------------------------------------------
// 1-D densities. All presets carry closed-form first and second derivatives;
// regularity is by construction, not verified numerically.
// ---------------------------------------------------------------------------

// p(x) = B^A / Gamma(A) * x^(A-1) * exp(-B x) on (0, inf).
class GammaDensity final : public ScalarField {
  public:
    GammaDensity(double shape, double rate) : a_(shape), b_(rate) {
        if (!(shape > 0) || !(rate > 0)) throw BadParams("gamma density needs shape, rate > 0");
        lognorm_ = a_ * std::log(b_) - std::lgamma(a_);
    }
    double value(const Vec& x) const override {
        const double t = x[0];
        if (!(t > 0)) return 0.0;
        return std::exp(lognorm_ + (a_ - 1) * std::log(t) - b_ * t);
    }
    Vec gradient(const Vec& x) const override {
        Vec g(1);
        g[0] = value(x) * dlog(x[0]);
        return g;
    }
    Mat hessian(const Vec& x) const override {
        Mat h(1, 1);
        const double t = x[0], s = dlog(t);
        h(0, 0) = value(x) * (s * s - (a_ - 1) / (t * t));
        return h;
    }
    double shape() const { return a_; }
    double rate() const { return b_; }

  private:
    double dlog(double t) const { return (a_ - 1) / t - b_; }
    double a_, b_, lognorm_;
};

// Standard or scaled/shifted normal density on R.
class Gauss1dDensity final : public ScalarField {
  public:
    explicit Gauss1dDensity(double mean = 0.0, double sigma = 1.0) : mu_(mean), sig_(sigma) {
        if (!(sigma > 0)) throw BadParams("gaussian density needs sigma > 0");
    }
    double value(const Vec& x) const override {
        const double z = (x[0] - mu_) / sig_;
        return std::exp(-0.5 * z * z) / (sig_ * std::sqrt(2 * M_PI));
    }
    Vec gradient(const Vec& x) const override {
        Vec g(1);
        g[0] = value(x) * dlog(x[0]);
        return g;
    }
    Mat hessian(const Vec& x) const override {
        Mat h(1, 1);
        const double s = dlog(x[0]);
        h(0, 0) = value(x) * (s * s - 1.0 / (sig_ * sig_));
        return h;
    }

  private:
    double dlog(double t) const { return -(t - mu_) / (sig_ * sig_); }
    double mu_, sig_;
};

// p(x) = 1 / (pi (1 + x^2)); the reciprocal of the zero-growth covariance.
class CauchyDensity final : public ScalarField {
  public:
    double value(const Vec& x) const override { return 1.0 / (M_PI * (1.0 + x[0] * x[0])); }
    Vec gradient(const Vec& x) const override {
        Vec g(1);
        const double t = x[0];
        g[0] = value(x) * (-2 * t / (1 + t * t));
        return g;
    }
    Mat hessian(const Vec& x) const override {
        Mat h(1, 1);
        const double t = x[0], q = 1 + t * t;
        const double dl = -2 * t / q, d2l = (2 * t * t - 2) / (q * q);
        h(0, 0) = value(x) * (dl * dl + d2l);
        return h;
    }
};

// p(x) = N exp(sum_k a_k x^k); N supplied by the caller after normalizing.
class ExpPoly1dDensity final : public ScalarField {
  public:
    explicit ExpPoly1dDensity(std::vector<double> coeffs, double norm = 1.0)
        : a_(std::move(coeffs)), norm_(norm) {}
    void set_norm(double n) { norm_ = n; }
    double value(const Vec& x) const override { return norm_ * std::exp(poly(x[0])); }
    Vec gradient(const Vec& x) const override {
        Vec g(1);
        g[0] = value(x) * dpoly(x[0]);
        return g;
    }
    Mat hessian(const Vec& x) const override {
        Mat h(1, 1);
        const double s = dpoly(x[0]);
        h(0, 0) = value(x) * (s * s + d2poly(x[0]));
        return h;
    }

  private:
    double poly(double t) const {
        double s = 0, tp = 1;
        for (double ak : a_) {
            s += ak * tp;
            tp *= t;
        }
        return s;
    }
    double dpoly(double t) const {
        double s = 0, tp = 1;
        for (size_t k = 1; k < a_.size(); ++k) {
            s += a_[k] * k * tp;
            tp *= t;
        }
        return s;
    }
    double d2poly(double t) const {
        double s = 0, tp = 1;
        for (size_t k = 2; k < a_.size(); ++k) {
            s += a_[k] * k * (k - 1) * tp;
            tp *= t;
        }
        return s;
    }
    std::vector<double> a_;
    double norm_;
};

// Product of independent (optionally truncated) normals on a box.
class GaussProductDensity final : public ScalarField {
  public:
    GaussProductDensity(int dim, std::vector<double> sigmas, std::vector<double> trunc_lo = {},
                        std::vector<double> trunc_hi = {})
        : d_(dim), sig_(std::move(sigmas)) {
        if (int(sig_.size()) != dim) throw BadParams("need one sigma per axis");
        logz_ = 0;
        for (int i = 0; i < d_; ++i) {
            double z = 1.0;
            if (!trunc_lo.empty())
                z = 0.5 * (std::erf(trunc_hi[i] / (sig_[i] * M_SQRT2)) -
                           std::erf(trunc_lo[i] / (sig_[i] * M_SQRT2)));
            logz_ += std::log(sig_[i] * std::sqrt(2 * M_PI) * z);
        }
    }
    double value(const Vec& x) const override {
        double e = 0;
        for (int i = 0; i < d_; ++i) e += -0.5 * x[i] * x[i] / (sig_[i] * sig_[i]);
        return std::exp(e - logz_);
    }
    Vec gradient(const Vec& x) const override {
        const double v = value(x);
        Vec g(d_);
        for (int i = 0; i < d_; ++i) g[i] = v * (-x[i] / (sig_[i] * sig_[i]));
        return g;
    }
    Mat hessian(const Vec& x) const override {
        const double v = value(x);
        Mat h(d_, d_);
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j) {
                const double li = -x[i] / (sig_[i] * sig_[i]), lj = -x[j] / (sig_[j] * sig_[j]);
                h(i, j) = v * (li * lj - (i == j ? 1.0 / (sig_[i] * sig_[i]) : 0.0));
            }
        return h;
    }

  private:
    int d_;
    std::vector<double> sig_;
    double logz_;
};

class UniformDensity final : public ScalarField {
  public:
    UniformDensity(int dim, double volume) : d_(dim), inv_vol_(1.0 / volume) {}
    double value(const Vec&) const override { return inv_vol_; }
    Vec gradient(const Vec&) const override { return Vec::Zero(d_); }
    Mat hessian(const Vec&) const override { return Mat::Zero(d_, d_); }

  private:
    int d_;
    double inv_vol_;
};

// ---------------------------------------------------------------------------
// Covariances
// ---------------------------------------------------------------------------

// 1-D polynomial covariance c(x) = sum_k b_k x^k (CIR is [0, xi^2]).
class Poly1dCovariance final : public CovarianceField {
  public:
    explicit Poly1dCovariance(std::vector<double> coeffs) : b_(std::move(coeffs)) {}
    Mat value(const Vec& x) const override {
        Mat m(1, 1);
        m(0, 0) = poly(x[0], 0);
        return m;
    }
    Mat partial_matrix(const Vec& x, int) const override {
        Mat m(1, 1);
        m(0, 0) = poly(x[0], 1);
        return m;
    }
    Vec divergence(const Vec& x) const override {
        Vec v(1);
        v[0] = poly(x[0], 1);
        return v;
    }
    double div_div(const Vec& x) const override { return poly(x[0], 2); }
    Mat sqrt(const Vec& x) const override {
        Mat m(1, 1);
        const double v = poly(x[0], 0);
        m(0, 0) = v > 0 ? std::sqrt(v) : 0.0;
        return m;
    }

  private:
    double poly(double t, int deriv) const {
        double s = 0, tp = 1;
        for (size_t k = deriv; k < b_.size(); ++k) {
            double f = 1;
            for (int j = 0; j < deriv; ++j) f *= double(k - j);
            s += b_[k] * f * tp;
            tp *= t;
        }
        return s;
    }
    std::vector<double> b_;
};

class ConstDiagCovariance final : public CovarianceField {
  public:
    explicit ConstDiagCovariance(Vec diag) : diag_(std::move(diag)) {}
    static ConstDiagCovariance identity(int d) { return ConstDiagCovariance(Vec::Ones(d)); }
    Mat value(const Vec&) const override { return Mat(diag_.asDiagonal()); }
    Mat partial_matrix(const Vec& x, int) const override {
        return Mat::Zero(x.size(), x.size());
    }
    Vec divergence(const Vec& x) const override { return Vec::Zero(x.size()); }
    double div_div(const Vec&) const override { return 0.0; }
    Mat sqrt(const Vec&) const override { return Mat(diag_.cwiseSqrt().asDiagonal()); }

  private:
    Vec diag_;
};

}  // namespace rgo
