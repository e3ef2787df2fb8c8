#ifndef GVACL_ELBO_HPP
#define GVACL_ELBO_HPP

#include <vector>

#include "gvacl/data.hpp"

namespace gvacl {

// Gradient of the full variational lower bound, on the natural scale of
// every coordinate.
struct FullGradient {
    std::vector<double> beta;
    double sigma2_u = 0.0;
    double sigma2_v = 0.0;
    std::vector<double> mu_u, lam_u, mu_v, lam_v;
};

// Gradient of the composite row-column lower bound.
struct CompositeGradient {
    double beta0_r = 0.0;
    double beta0_c = 0.0;
    std::vector<double> slopes;
    double sigma2_u = 0.0;
    double sigma2_v = 0.0;
    std::vector<double> mu_u, lam_u, mu_v, lam_v;
};

// Full Gaussian variational lower bound on the marginal log-likelihood,
// up to the constant_offset(data) term. Cell terms are weighted by
// 1/a(phi) so the Jensen bound holds for Gamma with known shape.
double full_elbo(const ModelParams& psi, const VariationalParams& xi,
                 const Dataset& data);

FullGradient full_elbo_grad(const ModelParams& psi, const VariationalParams& xi,
                            const Dataset& data);

// Row-column composite variational lower bound: row block with the row
// intercept and (mu_u, lam_u), column block with the column intercept and
// (mu_v, lam_v), plus both penalty sums.
double composite_elbo(const CompositeParams& psi_rc, const VariationalParams& xi,
                      const Dataset& data);

CompositeGradient composite_elbo_grad(const CompositeParams& psi_rc,
                                      const VariationalParams& xi,
                                      const Dataset& data);

}  // namespace gvacl

#endif
