#ifndef GVACL_OPTIMIZER_HPP
#define GVACL_OPTIMIZER_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gvacl/data.hpp"
#include "gvacl/elbo.hpp"

namespace gvacl {

enum class Method { FullGva, Gvacl };

enum class InitStrategy { Moments, Zeros };

struct FitError : std::runtime_error {
    explicit FitError(const std::string& msg) : std::runtime_error(msg) {}
};

struct FitConfig {
    Method method = Method::Gvacl;
    int max_iters = 500;
    double rel_tol = 1e-8;
    double grad_tol = 1e-6;
    InitStrategy init = InitStrategy::Moments;
    std::uint64_t seed = 0;
    bool block_coordinate = false;  // xi-step / psi-step fallback, debugging only
};

struct FitResult {
    Method method = Method::Gvacl;
    ModelParams estimates;  // beta[0] recovered for gvacl
    std::optional<CompositeParams> raw_composite;
    VariationalParams xi_hat;
    std::vector<double> elbo_trace;
    bool converged = false;
    bool boundary = false;       // a variance ended on the lower floor
    bool init_fallback = false;  // moments init failed, fell back to zeros
    bool experimental_correction = false;  // logistic conjectured correction
    int iters = 0;
    double wall_time_s = 0.0;
};

// Variance components are floored here (natural scale) so the penalty terms
// cannot diverge; a fit ending on the floor sets FitResult::boundary.
inline constexpr double kSigma2Floor = 1e-6;

FitResult fit(const Dataset& data, const FitConfig& config);

// Starting values. `moments` runs 25 Fisher-scoring steps of the
// no-random-effect GLM for beta and seeds the variances from row/column
// means of working residuals (clamped to [0.01, 1]); `zeros` is the fixed
// all-zero start. The bool is true when moments failed and zeros was used.
std::pair<ModelParams, VariationalParams> initialize_full(
    const Dataset& data, InitStrategy strategy, bool* fallback = nullptr);
std::pair<CompositeParams, VariationalParams> initialize_composite(
    const Dataset& data, InitStrategy strategy, bool* fallback = nullptr);

}  // namespace gvacl

#endif
