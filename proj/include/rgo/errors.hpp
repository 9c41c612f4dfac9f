#pragma once

#include <stdexcept>
#include <string>

namespace rgo {

// Numerical-failure family: the CLI maps these to exit code 2.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularCovariance : NumericalError {
    using NumericalError::NumericalError;
};
struct NonpositiveDensity : NumericalError {
    using NumericalError::NumericalError;
};
struct GridTooCoarse : NumericalError {
    using NumericalError::NumericalError;
};
struct AssumptionViolated : NumericalError {
    explicit AssumptionViolated(int item, const std::string& what)
        : NumericalError(what), item(item) {}
    int item;  // 1, 2, or 3
};
struct NotGradientCase : NumericalError {
    using NumericalError::NumericalError;
};
struct NotInDomainD : NumericalError {
    using NumericalError::NumericalError;
};
struct NonSymmetricAssembly : NumericalError {
    using NumericalError::NumericalError;
};
struct NoConvergence : NumericalError {
    NoConvergence(const std::string& what, double residual)
        : NumericalError(what), final_residual(residual) {}
    double final_residual;
};
struct NotDivergenceFree : NumericalError {
    using NumericalError::NumericalError;
};
struct AllPathsExploded : NumericalError {
    using NumericalError::NumericalError;
};
struct TieDerivative : NumericalError {
    using NumericalError::NumericalError;
};
struct BadParams : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace rgo
