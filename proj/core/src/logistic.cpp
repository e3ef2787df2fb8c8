#include "gvacl/logistic.hpp"

#include <chrono>
#include <cmath>

#include "gvacl/lbfgs.hpp"
#include "gvacl/quadrature.hpp"
#include "param_pack.hpp"

namespace gvacl {

namespace {

double softplus(double x) {
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// E softplus(eta + Z), Z ~ N(mu, lam), by Gauss-Hermite; also its
// derivatives in eta (= in mu) and in lam.
struct SoftplusMoment {
    double value, d_eta, d_lam;
};

SoftplusMoment gh_softplus(const QuadRule& rule, double eta, double mu,
                           double lam) {
    const double s = std::sqrt(lam);
    SoftplusMoment out{0.0, 0.0, 0.0};
    for (size_t k = 0; k < rule.nodes.size(); ++k) {
        const double z = eta + mu + s * rule.nodes[k];
        const double sig = sigmoid(z);
        out.value += rule.weights[k] * softplus(z);
        out.d_eta += rule.weights[k] * sig;
        out.d_lam += rule.weights[k] * sig * rule.nodes[k] / (2.0 * s);
    }
    return out;
}

struct Objective {
    const Dataset& data;
    const QuadRule& rule;

    double operator()(const CompositeParams& rc, const VariationalParams& xi,
                      CompositeGradient* g) const {
        double acc = 0.0;
        if (g) {
            g->beta0_r = g->beta0_c = g->sigma2_u = g->sigma2_v = 0.0;
            g->slopes.assign(data.p, 0.0);
            g->mu_u.assign(data.m, 0.0);
            g->lam_u.assign(data.m, 0.0);
            g->mu_v.assign(data.n, 0.0);
            g->lam_v.assign(data.n, 0.0);
        }
        for (int i = 0; i < data.m; ++i) {
            for (int j = 0; j < data.n; ++j) {
                const double* x = data.xat(i, j);
                const double y = data.yat(i, j);
                double eta_r = rc.beta0_r, eta_c = rc.beta0_c;
                for (int k = 0; k < data.p; ++k) {
                    eta_r += rc.slopes[k] * x[k];
                    eta_c += rc.slopes[k] * x[k];
                }
                const SoftplusMoment sr = gh_softplus(rule, eta_r, xi.mu_u[i], xi.lam_u[i]);
                const SoftplusMoment sc = gh_softplus(rule, eta_c, xi.mu_v[j], xi.lam_v[j]);
                acc += y * (eta_r + xi.mu_u[i]) - sr.value;
                acc += y * (eta_c + xi.mu_v[j]) - sc.value;
                if (g) {
                    const double dr = y - sr.d_eta;
                    const double dc = y - sc.d_eta;
                    g->beta0_r += dr;
                    g->beta0_c += dc;
                    for (int k = 0; k < data.p; ++k) g->slopes[k] += (dr + dc) * x[k];
                    g->mu_u[i] += dr;
                    g->lam_u[i] += -sr.d_lam;
                    g->mu_v[j] += dc;
                    g->lam_v[j] += -sc.d_lam;
                }
            }
        }
        // penalty terms
        auto pen = [&](const std::vector<double>& mu, const std::vector<double>& lam,
                       double s2, std::vector<double>* gmu, std::vector<double>* glam,
                       double* gs2) {
            for (size_t i = 0; i < mu.size(); ++i) {
                acc += 0.5 * (std::log(lam[i] / s2) - (mu[i] * mu[i] + lam[i]) / s2);
                if (gmu) {
                    (*gmu)[i] += -mu[i] / s2;
                    (*glam)[i] += 0.5 / lam[i] - 0.5 / s2;
                    *gs2 += -0.5 / s2 + 0.5 * (mu[i] * mu[i] + lam[i]) / (s2 * s2);
                }
            }
        };
        pen(xi.mu_u, xi.lam_u, rc.sigma2_u, g ? &g->mu_u : nullptr,
            g ? &g->lam_u : nullptr, g ? &g->sigma2_u : nullptr);
        pen(xi.mu_v, xi.lam_v, rc.sigma2_v, g ? &g->mu_v : nullptr,
            g ? &g->lam_v : nullptr, g ? &g->sigma2_v : nullptr);
        return acc;
    }
};

}  // namespace

FitResult fit_logistic_experimental(const Dataset& data, const FitConfig& config,
                                    int quad_nodes) {
    data.validate();
    if (data.family.tag != FamilyTag::LogisticExperimental)
        throw UnsupportedFamilyError("fit_logistic_experimental needs binary responses");
    if (data.m < 2 || data.n < 2)
        throw std::invalid_argument(
            "composite fit requires m >= 2 and n >= 2; the row/column "
            "decomposition is vacuous on a degenerate grid");

    const auto t0 = std::chrono::steady_clock::now();
    const int p = data.p, m = data.m, n = data.n;
    const QuadRule& rule = gauss_hermite(quad_nodes);
    const Objective objective{data, rule};

    bool fallback = false;
    auto [rc0, xi0] = initialize_composite(data, config.init, &fallback);
    auto z0 = detail::pack_composite(rc0, xi0);

    CompositeParams rc_buf;
    VariationalParams xi_buf;
    CompositeGradient g_buf;
    ObjectiveFn obj = [&](const std::vector<double>& z, std::vector<double>& grad) {
        detail::unpack_composite(z, p, m, n, rc_buf, xi_buf);
        const double f = objective(rc_buf, xi_buf, &g_buf);
        detail::chain_composite(z, p, m, n, g_buf, grad);
        return f;
    };

    LbfgsOptions opts;
    opts.max_iters = config.max_iters;
    opts.rel_tol = config.rel_tol;
    opts.grad_tol = config.grad_tol;
    LbfgsResult r = lbfgs_maximize(obj, std::move(z0), opts);

    CompositeParams rc;
    FitResult out;
    detail::unpack_composite(r.x, p, m, n, rc, out.xi_hat);

    const double denom = 1.0 - 0.1 * (rc.sigma2_u + rc.sigma2_v);
    if (!(denom > 0.0))
        throw FitError("conjectured correction denominator is nonpositive");

    out.method = Method::Gvacl;
    out.estimates.beta.assign(p + 1, 0.0);
    out.estimates.beta[0] = (rc.beta0_r + rc.beta0_c) / (2.0 * denom);
    for (int k = 0; k < p; ++k) out.estimates.beta[k + 1] = rc.slopes[k] / denom;
    out.estimates.sigma2_u = rc.sigma2_u;
    out.estimates.sigma2_v = rc.sigma2_v;
    out.raw_composite = std::move(rc);
    out.elbo_trace = std::move(r.trace);
    out.converged = r.converged;
    out.iters = r.iters;
    out.init_fallback = fallback;
    out.experimental_correction = true;
    out.boundary = out.estimates.sigma2_u <= kSigma2Floor * (1 + 1e-9) ||
                   out.estimates.sigma2_v <= kSigma2Floor * (1 + 1e-9);
    out.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace gvacl
