#pragma once

#include "rgo/domain.hpp"
#include "rgo/errors.hpp"
#include "rgo/field.hpp"
#include "rgo/quadrature.hpp"

#include <memory>
#include <string>

namespace rgo {

// The single input object of the whole pipeline: (E, c, p).
struct MarketModel {
    Domain domain;
    CovarianceFieldPtr c;
    ScalarFieldPtr p;
    double mass_tolerance = 1e-6;
    double condition_cap = 1e12;
    std::string name;

    int ambient_dim() const { return domain.ambient_dim(); }
    int effective_dim() const { return domain.effective_dim(); }
    bool is_simplex() const { return domain.kind() == DomainKind::simplex; }
};

double density_mass(const MarketModel& model, int level);

// Checks p > 0 sampling-wise, c symmetric/PD on the tangent space, and that
// the density mass over the largest truncation is within tolerance of 1.
void validate_model(const MarketModel& model);

// The drift-characteristic field ell = grad p / p + c^{-1} div c.
// On the simplex the returned vector is the tangent-space version
// (zero-sum; see EffectiveModel for the slice-coordinate view).
Vec ell_at(const MarketModel& model, const Vec& x);
VectorFieldPtr ell_field(const MarketModel& model);

// View of the model in effective coordinates: identity for interval/box,
// slice coordinates (orthonormal zero-sum basis through the barycenter)
// for the simplex. All PDE and quadrature work happens here.
class EffectiveModel {
  public:
    explicit EffectiveModel(const MarketModel& m) : model_(&m) {}

    int dim() const { return model_->effective_dim(); }
    const MarketModel& market() const { return *model_; }

    Vec to_ambient(const Vec& y) const { return model_->domain.to_ambient(y); }

    double density(const Vec& y) const { return model_->p->value(to_ambient(y)); }

    Vec density_gradient(const Vec& y) const {
        const Vec x = to_ambient(y);
        if (!model_->is_simplex()) return model_->p->gradient(x);
        return model_->domain.slice_basis().transpose() * model_->p->gradient(x);
    }

    Mat covariance(const Vec& y) const {
        const Vec x = to_ambient(y);
        if (!model_->is_simplex()) return model_->c->value(x);
        const Mat& basis = model_->domain.slice_basis();
        return basis.transpose() * model_->c->value(x) * basis;
    }

    // Divergence of the effective covariance in slice coordinates; reduces to
    // div c for interval/box.
    Vec covariance_divergence(const Vec& y) const {
        const Vec x = to_ambient(y);
        if (!model_->is_simplex()) return model_->c->divergence(x);
        const int d = model_->ambient_dim();
        const Mat proj = zero_sum_projector(d);
        const Vec w = model_->c->directional_divergence(x, proj);
        return model_->domain.slice_basis().transpose() * w;
    }

    // ell in effective coordinates.
    Vec ell(const Vec& y) const {
        const double pv = density(y);
        if (!(pv > 0)) throw NonpositiveDensity("density not positive at queried point");
        const Mat cv = covariance(y);
        check_condition(cv);
        return density_gradient(y) / pv + cv.llt().solve(covariance_divergence(y));
    }

  private:
    void check_condition(const Mat& cv) const {
        Eigen::SelfAdjointEigenSolver<Mat> es(cv);
        const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
        if (!(lo > 0) || hi / lo > model_->condition_cap)
            throw SingularCovariance("covariance is singular or badly conditioned on the tangent space");
    }

    const MarketModel* model_;
};

}  // namespace rgo
