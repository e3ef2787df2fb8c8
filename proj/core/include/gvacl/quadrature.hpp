#ifndef GVACL_QUADRATURE_HPP
#define GVACL_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace gvacl {

// Probabilists' convention: sum_k w_k f(x_k) ~ integral of f against the
// standard normal density; weights sum to 1.
struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Hermite rule with N nodes, 1 <= N <= 100. Rules are cached per N.
const QuadRule& gauss_hermite(int N);

// log of integral exp(f(x)) dx with nodes recentered at `mode` and rescaled
// by 1/sqrt(curvature) (minus the second derivative of f at the mode).
// Evaluated in log space.
double aghq_1d(const std::function<double(double)>& log_f, double mode,
               double curvature, int N);

// 20-step safeguarded Newton search for the mode of a log-integrand,
// starting from x0. On success returns the mode and writes the local
// curvature (positive) through curvature_out.
double find_mode_1d(const std::function<double(double)>& log_f, double x0,
                    double* curvature_out);

// Product-rule evaluation of E log(1+exp(eta+U+V)) under U ~ N(mu_u, lam_u),
// V ~ N(mu_v, lam_v).
double logistic_e_btheta_2d(double eta, double mu_u, double lam_u, double mu_v,
                            double lam_v, int n1, int n2);

}  // namespace gvacl

#endif
