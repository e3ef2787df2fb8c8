#ifndef GVACL_FAMILY_HPP
#define GVACL_FAMILY_HPP

#include <stdexcept>
#include <string>

namespace gvacl {

// Exponent cap on the natural-log scale. Anything above this raises
// OverflowError instead of returning inf, so the line search can detect
// divergence explicitly.
inline constexpr double kExpCap = 700.0;

struct OverflowError : std::runtime_error {
    explicit OverflowError(const std::string& msg) : std::runtime_error(msg) {}
};

struct UnsupportedFamilyError : std::invalid_argument {
    explicit UnsupportedFamilyError(const std::string& msg)
        : std::invalid_argument(msg) {}
};

enum class FamilyTag { Poisson, Gamma, LogisticExperimental };

// Response family. Gamma carries a known shape alpha; the other two have no
// extra fields.
struct Family {
    FamilyTag tag = FamilyTag::Poisson;
    double shape = 1.0;  // Gamma shape alpha, ignored otherwise

    static Family poisson() { return {FamilyTag::Poisson, 1.0}; }
    static Family gamma(double alpha);
    static Family logistic_experimental() {
        return {FamilyTag::LogisticExperimental, 1.0};
    }

    // 1/a(phi): 1 for Poisson and logistic, alpha for Gamma.
    double weight() const {
        return tag == FamilyTag::Gamma ? shape : 1.0;
    }
    const char* name() const;
};

// exp(x) with the divergence guard.
double guarded_exp(double x);

// E[theta_ij] under independent Gaussian variational factors
// U ~ N(mu_u, lam_u), V ~ N(mu_v, lam_v), with linear predictor eta.
double e_theta_joint(const Family& family, double eta, double mu_u,
                     double lam_u, double mu_v, double lam_v);

// E[b(theta_ij)] under the same variational factors.
double e_btheta_joint(const Family& family, double eta, double mu_u,
                      double lam_u, double mu_v, double lam_v);

// Single-random-effect analogues used by the row and column composite
// blocks. Row and column formulas coincide; only the predictor differs.
double e_theta_row(const Family& family, double eta, double mu, double lam);
double e_btheta_row(const Family& family, double eta, double mu, double lam);
double e_theta_col(const Family& family, double eta, double mu, double lam);
double e_btheta_col(const Family& family, double eta, double mu, double lam);

// Exact conditional log-density of y given linear predictor eta, with all
// normalizing constants included. Used by quadrature oracles and the
// logistic fit, never by the closed-form ELBOs.
double log_density(const Family& family, double y, double eta);

// c(y, phi) for one response: the part of log f dropped by the ELBOs.
// Summed over a dataset this aligns an ELBO with a true log-likelihood.
double log_density_constant(const Family& family, double y);

}  // namespace gvacl

#endif
