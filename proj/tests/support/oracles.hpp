// Test-only oracles, independent of the closed-form implementation paths
// they are used to check.
#ifndef GVACL_TEST_ORACLES_HPP
#define GVACL_TEST_ORACLES_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "gvacl/data.hpp"

namespace gvacl::test {

// Exact marginal log-likelihood by tensor-product Gauss-Hermite over the
// column effects with the row effects integrated out row by row. Intended
// for m, n <= 4.
double oracle_full_loglik(const Dataset& data, const ModelParams& psi, int N);

// Row-column composite log-likelihood (sum of the two one-dimensional
// marginalizations) by Gauss-Hermite.
double oracle_composite_loglik(const Dataset& data, const CompositeParams& psi,
                               int N);

// Straight scalar transcriptions of the two lower bounds, written from the
// displayed formulas without the library's shared kernels.
double scalar_full_elbo(const ModelParams& psi, const VariationalParams& xi,
                        const Dataset& data);
double scalar_composite_elbo(const CompositeParams& psi,
                             const VariationalParams& xi, const Dataset& data);

// Central finite differences, one step size per coordinate's natural scale.
std::vector<double> fd_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h = 1e-5);

// Random joint instance with moderate parameters, responses drawn from the
// family's model.
struct Instance {
    Dataset data;
    ModelParams psi;
    CompositeParams rc;
    VariationalParams xi;
};
Instance random_instance(FamilyTag tag, int m, int n, int p, std::uint64_t seed);

// Monte Carlo E[theta] / E[b(theta)] under the variational Gaussians;
// returns (estimate, standard error).
struct McEstimate {
    double value;
    double se;
};
McEstimate mc_e_theta_joint(const Family& family, double eta, double mu_u,
                            double lam_u, double mu_v, double lam_v,
                            std::size_t draws, std::uint64_t seed);
McEstimate mc_e_btheta_joint(const Family& family, double eta, double mu_u,
                             double lam_u, double mu_v, double lam_v,
                             std::size_t draws, std::uint64_t seed);

}  // namespace gvacl::test

#endif
