#include "gvacl/elbo.hpp"

#include <cmath>
#include <cstddef>

#include "exact_sum.hpp"

namespace gvacl {

namespace {

void check_dims_full(const ModelParams& psi, const VariationalParams& xi,
                     const Dataset& data) {
    if (static_cast<int>(psi.beta.size()) != data.p + 1)
        throw std::invalid_argument("beta length must be p+1");
    if (static_cast<int>(xi.mu_u.size()) != data.m ||
        static_cast<int>(xi.lam_u.size()) != data.m ||
        static_cast<int>(xi.mu_v.size()) != data.n ||
        static_cast<int>(xi.lam_v.size()) != data.n)
        throw std::invalid_argument("variational parameter dimensions do not match (m,n)");
    if (!(psi.sigma2_u > 0.0) || !(psi.sigma2_v > 0.0))
        throw std::invalid_argument("variance components must be positive");
    for (double l : xi.lam_u)
        if (!(l > 0.0)) throw std::invalid_argument("lam_u must be positive");
    for (double l : xi.lam_v)
        if (!(l > 0.0)) throw std::invalid_argument("lam_v must be positive");
    if (data.family.tag == FamilyTag::LogisticExperimental)
        throw UnsupportedFamilyError(
            "closed-form ELBO is only available for Poisson and Gamma");
}

void check_dims_composite(const CompositeParams& psi_rc,
                          const VariationalParams& xi, const Dataset& data) {
    ModelParams proxy;
    proxy.beta.assign(data.p + 1, 0.0);
    proxy.sigma2_u = psi_rc.sigma2_u;
    proxy.sigma2_v = psi_rc.sigma2_v;
    if (static_cast<int>(psi_rc.slopes.size()) != data.p)
        throw std::invalid_argument("slope length must be p");
    check_dims_full(proxy, xi, data);
}

double dot_slopes(const double* x, const std::vector<double>& beta, int p,
                  int offset) {
    double eta = beta[0];
    for (int k = 0; k < p; ++k) eta += beta[offset + k] * x[k];
    return eta;
}

double penalty(const std::vector<double>& mu, const std::vector<double>& lam,
               double sigma2) {
    detail::ExactSum acc;
    for (size_t i = 0; i < mu.size(); ++i)
        acc.add(0.5 * (std::log(lam[i] / sigma2) - (mu[i] * mu[i] + lam[i]) / sigma2));
    return acc.value();
}

// d penalty / d sigma2, plus per-coordinate mu/lam pieces appended to grads.
void penalty_grad(const std::vector<double>& mu, const std::vector<double>& lam,
                  double sigma2, std::vector<double>& g_mu,
                  std::vector<double>& g_lam, double& g_sigma2) {
    const double inv = 1.0 / sigma2;
    detail::ExactSum gs;
    for (size_t i = 0; i < mu.size(); ++i) {
        g_mu[i] += -mu[i] * inv;
        g_lam[i] += 0.5 / lam[i] - 0.5 * inv;
        gs.add(-0.5 * inv + 0.5 * (mu[i] * mu[i] + lam[i]) * inv * inv);
    }
    g_sigma2 += gs.value();
}

}  // namespace

double full_elbo(const ModelParams& psi, const VariationalParams& xi,
                 const Dataset& data) {
    check_dims_full(psi, xi, data);
    const double w = data.family.weight();
    detail::ExactSum acc;
    try {
        for (int i = 0; i < data.m; ++i) {
            for (int j = 0; j < data.n; ++j) {
                const double eta = dot_slopes(data.xat(i, j), psi.beta, data.p, 1);
                const double et = e_theta_joint(data.family, eta, xi.mu_u[i],
                                                xi.lam_u[i], xi.mu_v[j], xi.lam_v[j]);
                const double eb = e_btheta_joint(data.family, eta, xi.mu_u[i],
                                                 xi.lam_u[i], xi.mu_v[j], xi.lam_v[j]);
                acc.add(w * (data.yat(i, j) * et - eb));
            }
        }
    } catch (const OverflowError& e) {
        throw OverflowError(std::string("full ELBO cell term diverged (") +
                            e.what() + ")");
    }
    acc.add(penalty(xi.mu_u, xi.lam_u, psi.sigma2_u));
    acc.add(penalty(xi.mu_v, xi.lam_v, psi.sigma2_v));
    return acc.value();
}

FullGradient full_elbo_grad(const ModelParams& psi, const VariationalParams& xi,
                            const Dataset& data) {
    check_dims_full(psi, xi, data);
    const double w = data.family.weight();
    const bool poisson = data.family.tag == FamilyTag::Poisson;

    FullGradient g;
    g.beta.assign(data.p + 1, 0.0);
    g.mu_u.assign(data.m, 0.0);
    g.lam_u.assign(data.m, 0.0);
    g.mu_v.assign(data.n, 0.0);
    g.lam_v.assign(data.n, 0.0);

    std::vector<detail::ExactSum> a_beta(data.p + 1), a_mu_u(data.m),
        a_lam_u(data.m), a_mu_v(data.n), a_lam_v(data.n);

    try {
        for (int i = 0; i < data.m; ++i) {
            for (int j = 0; j < data.n; ++j) {
                const double* x = data.xat(i, j);
                const double eta = dot_slopes(x, psi.beta, data.p, 1);
                const double y = data.yat(i, j);
                double d_eta, d_lam_u, d_lam_v;
                if (poisson) {
                    const double a = guarded_exp(eta + xi.mu_u[i] + xi.lam_u[i] / 2 +
                                                 xi.mu_v[j] + xi.lam_v[j] / 2);
                    d_eta = y - a;          // also d/d mu_u and d/d mu_v
                    d_lam_u = -a / 2;
                    d_lam_v = -a / 2;
                } else {
                    const double t = -guarded_exp(-eta - xi.mu_u[i] + xi.lam_u[i] / 2 -
                                                  xi.mu_v[j] + xi.lam_v[j] / 2);
                    d_eta = w * (-y * t - 1.0);
                    d_lam_u = w * y * t / 2;
                    d_lam_v = w * y * t / 2;
                }
                a_beta[0].add(d_eta);
                for (int k = 0; k < data.p; ++k) a_beta[k + 1].add(d_eta * x[k]);
                a_mu_u[i].add(d_eta);
                a_mu_v[j].add(d_eta);
                a_lam_u[i].add(d_lam_u);
                a_lam_v[j].add(d_lam_v);
            }
        }
    } catch (const OverflowError& e) {
        throw OverflowError(std::string("full ELBO gradient diverged (") +
                            e.what() + ")");
    }
    for (int k = 0; k <= data.p; ++k) g.beta[k] = a_beta[k].value();
    for (int i = 0; i < data.m; ++i) {
        g.mu_u[i] = a_mu_u[i].value();
        g.lam_u[i] = a_lam_u[i].value();
    }
    for (int j = 0; j < data.n; ++j) {
        g.mu_v[j] = a_mu_v[j].value();
        g.lam_v[j] = a_lam_v[j].value();
    }
    penalty_grad(xi.mu_u, xi.lam_u, psi.sigma2_u, g.mu_u, g.lam_u, g.sigma2_u);
    penalty_grad(xi.mu_v, xi.lam_v, psi.sigma2_v, g.mu_v, g.lam_v, g.sigma2_v);
    return g;
}

double composite_elbo(const CompositeParams& psi_rc, const VariationalParams& xi,
                      const Dataset& data) {
    check_dims_composite(psi_rc, xi, data);
    const double w = data.family.weight();
    detail::ExactSum acc;
    std::vector<double> beta_r(data.p + 1), beta_c(data.p + 1);
    beta_r[0] = psi_rc.beta0_r;
    beta_c[0] = psi_rc.beta0_c;
    for (int k = 0; k < data.p; ++k) beta_r[k + 1] = beta_c[k + 1] = psi_rc.slopes[k];

    try {
        for (int i = 0; i < data.m; ++i) {
            for (int j = 0; j < data.n; ++j) {
                const double* x = data.xat(i, j);
                const double y = data.yat(i, j);
                const double eta_r = dot_slopes(x, beta_r, data.p, 1);
                const double eta_c = dot_slopes(x, beta_c, data.p, 1);
                acc.add(w * (y * e_theta_row(data.family, eta_r, xi.mu_u[i], xi.lam_u[i]) -
                             e_btheta_row(data.family, eta_r, xi.mu_u[i], xi.lam_u[i])));
                acc.add(w * (y * e_theta_col(data.family, eta_c, xi.mu_v[j], xi.lam_v[j]) -
                             e_btheta_col(data.family, eta_c, xi.mu_v[j], xi.lam_v[j])));
            }
        }
    } catch (const OverflowError& e) {
        throw OverflowError(std::string("composite ELBO block diverged (") +
                            e.what() + ")");
    }
    acc.add(penalty(xi.mu_u, xi.lam_u, psi_rc.sigma2_u));
    acc.add(penalty(xi.mu_v, xi.lam_v, psi_rc.sigma2_v));
    return acc.value();
}

CompositeGradient composite_elbo_grad(const CompositeParams& psi_rc,
                                      const VariationalParams& xi,
                                      const Dataset& data) {
    check_dims_composite(psi_rc, xi, data);
    const double w = data.family.weight();
    const bool poisson = data.family.tag == FamilyTag::Poisson;

    CompositeGradient g;
    g.slopes.assign(data.p, 0.0);
    g.mu_u.assign(data.m, 0.0);
    g.lam_u.assign(data.m, 0.0);
    g.mu_v.assign(data.n, 0.0);
    g.lam_v.assign(data.n, 0.0);

    detail::ExactSum a_b0r, a_b0c;
    std::vector<detail::ExactSum> a_slopes(data.p), a_mu_u(data.m),
        a_lam_u(data.m), a_mu_v(data.n), a_lam_v(data.n);

    try {
        for (int i = 0; i < data.m; ++i) {
            for (int j = 0; j < data.n; ++j) {
                const double* x = data.xat(i, j);
                const double y = data.yat(i, j);
                double eta_r = psi_rc.beta0_r, eta_c = psi_rc.beta0_c;
                for (int k = 0; k < data.p; ++k) {
                    eta_r += psi_rc.slopes[k] * x[k];
                    eta_c += psi_rc.slopes[k] * x[k];
                }
                double dr_eta, dr_lam, dc_eta, dc_lam;
                if (poisson) {
                    const double ar = guarded_exp(eta_r + xi.mu_u[i] + xi.lam_u[i] / 2);
                    const double ac = guarded_exp(eta_c + xi.mu_v[j] + xi.lam_v[j] / 2);
                    dr_eta = y - ar;
                    dr_lam = -ar / 2;
                    dc_eta = y - ac;
                    dc_lam = -ac / 2;
                } else {
                    const double tr = -guarded_exp(-eta_r - xi.mu_u[i] + xi.lam_u[i] / 2);
                    const double tc = -guarded_exp(-eta_c - xi.mu_v[j] + xi.lam_v[j] / 2);
                    dr_eta = w * (-y * tr - 1.0);
                    dr_lam = w * y * tr / 2;
                    dc_eta = w * (-y * tc - 1.0);
                    dc_lam = w * y * tc / 2;
                }
                a_b0r.add(dr_eta);
                a_b0c.add(dc_eta);
                for (int k = 0; k < data.p; ++k)
                    a_slopes[k].add((dr_eta + dc_eta) * x[k]);
                a_mu_u[i].add(dr_eta);
                a_lam_u[i].add(dr_lam);
                a_mu_v[j].add(dc_eta);
                a_lam_v[j].add(dc_lam);
            }
        }
    } catch (const OverflowError& e) {
        throw OverflowError(std::string("composite ELBO gradient diverged (") +
                            e.what() + ")");
    }
    g.beta0_r = a_b0r.value();
    g.beta0_c = a_b0c.value();
    for (int k = 0; k < data.p; ++k) g.slopes[k] = a_slopes[k].value();
    for (int i = 0; i < data.m; ++i) {
        g.mu_u[i] = a_mu_u[i].value();
        g.lam_u[i] = a_lam_u[i].value();
    }
    for (int j = 0; j < data.n; ++j) {
        g.mu_v[j] = a_mu_v[j].value();
        g.lam_v[j] = a_lam_v[j].value();
    }
    penalty_grad(xi.mu_u, xi.lam_u, psi_rc.sigma2_u, g.mu_u, g.lam_u, g.sigma2_u);
    penalty_grad(xi.mu_v, xi.lam_v, psi_rc.sigma2_v, g.mu_v, g.lam_v, g.sigma2_v);
    return g;
}

}  // namespace gvacl
