#ifndef GVACL_INFERENCE_HPP
#define GVACL_INFERENCE_HPP

#include <array>
#include <optional>
#include <vector>

#include "gvacl/data.hpp"

namespace gvacl {

using Matrix3 = std::array<std::array<double, 3>, 3>;
using Matrix2 = std::array<std::array<double, 2>, 2>;

// Inverts the composite intercept shifts beta0_r = beta0 + sigma2_v/2 and
// beta0_c = beta0 + sigma2_u/2.
double recover_intercept(double beta0_r, double beta0_c, double sigma2_u,
                         double sigma2_v);

// Asymptotic covariance blocks for the intercept error terms.
Matrix3 gamma1(double sigma2_u);
Matrix3 gamma2(double sigma2_v);

// Covariance block entering the Poisson slope variance.
Matrix2 gamma3(double sigma2_u, double sigma2_v);

// Covariance of the Gamma slope error terms.
Matrix2 sigma_tilde(double alpha, double sigma2_u, double sigma2_v);

// Plug-in standard error of the recovered intercept.
double se_beta0(double sigma2_u, double sigma2_v, int m, int n);

struct SigmaSe {
    double se_of_variance;
    double se_of_sd;  // delta method: se_of_variance / (2 sigma)
};

// Plug-in standard error of a variance component estimated from `count`
// effects (m for rows, n for columns).
SigmaSe se_sigma(double sigma2, int count);

double se_beta1_gamma(double alpha, double sigma2_u, double sigma2_v, int m,
                      int n);

// Covariate moment-generating function E exp(tX) and its first two
// derivatives, either as a closed-form normal law or as the empirical MGF
// of observed covariates.
class MgfSpec {
  public:
    static MgfSpec normal(double mean, double sd);
    static MgfSpec empirical(std::vector<double> xs);

    double phi(double t) const;
    double phi1(double t) const;
    double phi2(double t) const;
    std::string describe() const;

  private:
    bool is_normal_ = true;
    double mean_ = 0.0;
    double sd_ = 1.0;
    std::vector<double> xs_;
};

double se_beta1_poisson(double beta0, double beta1, double sigma2_u,
                        double sigma2_v, int m, int n, const MgfSpec& mgf);

struct AsymptoticSE {
    double se_beta0 = 0.0;
    std::optional<double> se_beta1;  // empty when the slope formula fails
    double se_sigma_u = 0.0;         // SD scale, matching how sigma is reported
    double se_sigma_v = 0.0;
};

// Plug-in SEs at the gvacl estimates. The slope SE uses the first slope and
// the supplied covariate MGF for Poisson, the closed form for Gamma.
AsymptoticSE standard_errors(const Family& family, const ModelParams& psi,
                             int m, int n, const MgfSpec& mgf);

}  // namespace gvacl

#endif
