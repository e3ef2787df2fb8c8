#ifndef GVACL_LOGISTIC_HPP
#define GVACL_LOGISTIC_HPP

#include "gvacl/data.hpp"
#include "gvacl/optimizer.hpp"

namespace gvacl {

// Experimental logistic fit: the composite variational objective with
// one-dimensional Gauss-Hermite quadrature for the b(theta) terms, followed
// by the conjectured intercept/slope corrections
//   beta0 = (beta0_r + beta0_c) / [2 {1 - 0.1 (s2u + s2v)}]
//   beta1 = beta1_rc / {1 - 0.1 (s2u + s2v)}.
// The result carries experimental_correction = true and the uncorrected
// composite parameters in raw_composite.
FitResult fit_logistic_experimental(const Dataset& data, const FitConfig& config,
                                    int quad_nodes = 15);

}  // namespace gvacl

#endif
