#include "gvacl/family.hpp"

#include <cmath>

namespace gvacl {

Family Family::gamma(double alpha) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("Gamma shape alpha must be positive");
    return {FamilyTag::Gamma, alpha};
}

const char* Family::name() const {
    switch (tag) {
        case FamilyTag::Poisson: return "poisson";
        case FamilyTag::Gamma: return "gamma";
        case FamilyTag::LogisticExperimental: return "logistic";
    }
    return "?";
}

double guarded_exp(double x) {
    if (x > kExpCap)
        throw OverflowError("exponent " + std::to_string(x) +
                            " exceeds the overflow cap");
    return std::exp(x);
}

namespace {

void check_lambda(double lam) {
    if (!(lam >= 0.0))
        throw std::invalid_argument("variational variance must be nonnegative");
}

[[noreturn]] void reject_logistic(const char* op) {
    throw UnsupportedFamilyError(std::string(op) +
                                 ": no closed form for the logistic family; "
                                 "use the quadrature routines");
}

}  // namespace

double e_theta_joint(const Family& family, double eta, double mu_u,
                     double lam_u, double mu_v, double lam_v) {
    check_lambda(lam_u);
    check_lambda(lam_v);
    switch (family.tag) {
        case FamilyTag::Poisson:
            return eta + mu_u + mu_v;
        case FamilyTag::Gamma:
            return -guarded_exp(-eta - mu_u + lam_u / 2 - mu_v + lam_v / 2);
        case FamilyTag::LogisticExperimental:
            reject_logistic("e_theta_joint");
    }
    return 0.0;
}

double e_btheta_joint(const Family& family, double eta, double mu_u,
                      double lam_u, double mu_v, double lam_v) {
    check_lambda(lam_u);
    check_lambda(lam_v);
    switch (family.tag) {
        case FamilyTag::Poisson:
            return guarded_exp(eta + mu_u + lam_u / 2 + mu_v + lam_v / 2);
        case FamilyTag::Gamma:
            return eta + mu_u + mu_v;
        case FamilyTag::LogisticExperimental:
            reject_logistic("e_btheta_joint");
    }
    return 0.0;
}

double e_theta_row(const Family& family, double eta, double mu, double lam) {
    check_lambda(lam);
    switch (family.tag) {
        case FamilyTag::Poisson:
            return eta + mu;
        case FamilyTag::Gamma:
            return -guarded_exp(-eta - mu + lam / 2);
        case FamilyTag::LogisticExperimental:
            reject_logistic("e_theta_row");
    }
    return 0.0;
}

double e_btheta_row(const Family& family, double eta, double mu, double lam) {
    check_lambda(lam);
    switch (family.tag) {
        case FamilyTag::Poisson:
            return guarded_exp(eta + mu + lam / 2);
        case FamilyTag::Gamma:
            return eta + mu;
        case FamilyTag::LogisticExperimental:
            reject_logistic("e_btheta_row");
    }
    return 0.0;
}

double e_theta_col(const Family& family, double eta, double mu, double lam) {
    return e_theta_row(family, eta, mu, lam);
}

double e_btheta_col(const Family& family, double eta, double mu, double lam) {
    return e_btheta_row(family, eta, mu, lam);
}

double log_density(const Family& family, double y, double eta) {
    switch (family.tag) {
        case FamilyTag::Poisson: {
            if (!(y >= 0.0) || std::floor(y) != y)
                throw std::domain_error(
                    "Poisson response must be a nonnegative integer");
            return y * eta - guarded_exp(eta) - std::lgamma(y + 1.0);
        }
        case FamilyTag::Gamma: {
            if (!(y > 0.0))
                throw std::domain_error("Gamma response must be positive");
            const double a = family.shape;
            return a * (-y * guarded_exp(-eta) - eta) + log_density_constant(family, y);
        }
        case FamilyTag::LogisticExperimental: {
            if (y != 0.0 && y != 1.0)
                throw std::domain_error("logistic response must be 0 or 1");
            // y*eta - log(1+e^eta), computed stably
            const double softplus =
                eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
            return y * eta - softplus;
        }
    }
    return 0.0;
}

double log_density_constant(const Family& family, double y) {
    switch (family.tag) {
        case FamilyTag::Poisson:
            return -std::lgamma(y + 1.0);
        case FamilyTag::Gamma: {
            const double a = family.shape;
            return a * std::log(a) - std::lgamma(a) + (a - 1.0) * std::log(y);
        }
        case FamilyTag::LogisticExperimental:
            return 0.0;
    }
    return 0.0;
}

}  // namespace gvacl
