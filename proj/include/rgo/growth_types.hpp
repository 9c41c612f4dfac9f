#pragma once

#include "rgo/diagnostics.hpp"
#include "rgo/model.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace rgo {

enum class Classification { finite, infinite, ill_posed_or_empty };

inline const char* to_string(Classification c) {
    switch (c) {
        case Classification::finite: return "Finite";
        case Classification::infinite: return "Infinite";
        case Classification::ill_posed_or_empty: return "IllPosedOrEmpty";
    }
    return "?";
}

struct GrowthReport {
    Classification classification = Classification::finite;
    std::optional<double> lambda;  // nats per unit time; present iff finite
    std::string method;            // closed_form_1d | gradient_case | variational | candidate_bound
    Diagnostics diagnostics;
    std::vector<std::string> notes;
};

// Generating function u > 0 with phi = 2 log u and the induced strategy
// grad u / u = grad phi / 2.
struct GeneratingFunction {
    ScalarFieldPtr u;
    ScalarFieldPtr phi;
    VectorFieldPtr strategy;
};

// --- closed-form generating functions -------------------------------------

// u = (p c)^s in one dimension; s = 1/2 is the optimizer sqrt(pc).
class PowerPC1dField final : public ScalarField {
  public:
    PowerPC1dField(ScalarFieldPtr p, CovarianceFieldPtr c, double power)
        : p_(std::move(p)), c_(std::move(c)), s_(power) {}

    double value(const Vec& x) const override { return std::pow(g(x), s_); }
    Vec gradient(const Vec& x) const override {
        Vec out(1);
        out[0] = value(x) * s_ * dg(x) / g(x);
        return out;
    }
    Mat hessian(const Vec& x) const override {
        Mat out(1, 1);
        const double gv = g(x), g1 = dg(x), g2 = d2g(x);
        out(0, 0) = value(x) * (s_ * (s_ - 1) * g1 * g1 / (gv * gv) + s_ * g2 / gv);
        return out;
    }

  private:
    double g(const Vec& x) const { return p_->value(x) * c_->value(x)(0, 0); }
    double dg(const Vec& x) const {
        return p_->gradient(x)[0] * c_->value(x)(0, 0) + p_->value(x) * c_->divergence(x)[0];
    }
    double d2g(const Vec& x) const {
        return p_->hessian(x)(0, 0) * c_->value(x)(0, 0) +
               2 * p_->gradient(x)[0] * c_->divergence(x)[0] + p_->value(x) * c_->div_div(x);
    }
    ScalarFieldPtr p_;
    CovarianceFieldPtr c_;
    double s_;
};

// phi = 2s log(pc); pairs with PowerPC1dField.
class LogPC1dField final : public ScalarField {
  public:
    LogPC1dField(ScalarFieldPtr p, CovarianceFieldPtr c, double scale = 1.0)
        : p_(std::move(p)), c_(std::move(c)), s_(scale) {}
    double value(const Vec& x) const override {
        return s_ * std::log(p_->value(x) * c_->value(x)(0, 0));
    }
    Vec gradient(const Vec& x) const override {
        Vec out(1);
        const double g = p_->value(x) * c_->value(x)(0, 0);
        const double dg = p_->gradient(x)[0] * c_->value(x)(0, 0) +
                          p_->value(x) * c_->divergence(x)[0];
        out[0] = s_ * dg / g;
        return out;
    }
    Mat hessian(const Vec& x) const override {
        Mat out(1, 1);
        const double g = p_->value(x) * c_->value(x)(0, 0);
        const double dg = p_->gradient(x)[0] * c_->value(x)(0, 0) +
                          p_->value(x) * c_->divergence(x)[0];
        const double d2g = p_->hessian(x)(0, 0) * c_->value(x)(0, 0) +
                           2 * p_->gradient(x)[0] * c_->divergence(x)[0] +
                           p_->value(x) * c_->div_div(x);
        out(0, 0) = s_ * (d2g / g - dg * dg / (g * g));
        return out;
    }

  private:
    ScalarFieldPtr p_;
    CovarianceFieldPtr c_;
    double s_;
};

// phi = log p + H and u = sqrt(p) exp(H/2), the gradient-case solution.
class LogPPlusHField final : public ScalarField {
  public:
    LogPPlusHField(ScalarFieldPtr p, ScalarFieldPtr h) : p_(std::move(p)), h_(std::move(h)) {}
    double value(const Vec& x) const override {
        return std::log(p_->value(x)) + h_->value(x);
    }
    Vec gradient(const Vec& x) const override {
        return Vec(p_->gradient(x) / p_->value(x) + h_->gradient(x));
    }
    Mat hessian(const Vec& x) const override {
        const double pv = p_->value(x);
        const Vec gp = p_->gradient(x) / pv;
        return Mat(p_->hessian(x) / pv - gp * gp.transpose() + h_->hessian(x));
    }

  private:
    ScalarFieldPtr p_, h_;
};

// u = exp(phi/2) for an arbitrary phi field.
class ExpHalfPhiField final : public ScalarField {
  public:
    explicit ExpHalfPhiField(ScalarFieldPtr phi) : phi_(std::move(phi)) {}
    double value(const Vec& x) const override { return std::exp(0.5 * phi_->value(x)); }
    Vec gradient(const Vec& x) const override {
        return Vec(0.5 * value(x) * phi_->gradient(x));
    }
    Mat hessian(const Vec& x) const override {
        const Vec g = phi_->gradient(x);
        return Mat(value(x) * (0.25 * g * g.transpose() + 0.5 * phi_->hessian(x)));
    }

  private:
    ScalarFieldPtr phi_;
};

class ConstantField final : public ScalarField {
  public:
    ConstantField(int dim, double v) : d_(dim), v_(v) {}
    double value(const Vec&) const override { return v_; }
    Vec gradient(const Vec&) const override { return Vec::Zero(d_); }
    Mat hessian(const Vec&) const override { return Mat::Zero(d_, d_); }

  private:
    int d_;
    double v_;
};

// Strategy field grad(phi)/2, tangent-lifted as-is (phi fields on the
// simplex are built from slice-aware machinery in the rank module).
inline VectorFieldPtr strategy_from_phi(ScalarFieldPtr phi) {
    return make_vector_field([phi](const Vec& x) { return Vec(0.5 * phi->gradient(x)); });
}

inline GeneratingFunction generating_from_phi(ScalarFieldPtr phi) {
    GeneratingFunction g;
    g.phi = phi;
    g.u = std::make_shared<ExpHalfPhiField>(phi);
    g.strategy = strategy_from_phi(phi);
    return g;
}

// L^c u / u = tr(c D^2 u) / (2u).
inline double lc_over_u(const MarketModel& model, const ScalarField& u, const Vec& x) {
    return 0.5 * (model.c->value(x) * u.hessian(x)).trace() / u.value(x);
}

}  // namespace rgo
