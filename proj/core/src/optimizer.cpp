#include "gvacl/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "exact_sum.hpp"
#include "gvacl/inference.hpp"
#include "gvacl/lbfgs.hpp"
#include "param_pack.hpp"

namespace gvacl {

namespace {

// Solve the (small) symmetric system A b = rhs by Gaussian elimination with
// partial pivoting. Throws on (near-)singularity.
std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                std::vector<double> rhs) {
    const int d = static_cast<int>(rhs.size());
    for (int c = 0; c < d; ++c) {
        int piv = c;
        for (int r = c + 1; r < d; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (std::abs(a[piv][c]) < 1e-12)
            throw std::runtime_error("singular normal equations");
        std::swap(a[c], a[piv]);
        std::swap(rhs[c], rhs[piv]);
        for (int r = c + 1; r < d; ++r) {
            const double f = a[r][c] / a[c][c];
            for (int k = c; k < d; ++k) a[r][k] -= f * a[c][k];
            rhs[r] -= f * rhs[c];
        }
    }
    std::vector<double> b(d);
    for (int c = d - 1; c >= 0; --c) {
        double s = rhs[c];
        for (int k = c + 1; k < d; ++k) s -= a[c][k] * b[k];
        b[c] = s / a[c][c];
    }
    return b;
}

struct GlmFit {
    std::vector<double> beta;
    std::vector<double> mu;  // fitted means, m*n
};

// 25 Fisher-scoring (IRLS) steps of the no-random-effect GLM with the
// family's canonical-for-us log (or logit) link.
GlmFit glm_moments_fit(const Dataset& data) {
    const int d = data.p + 1;
    const bool logistic = data.family.tag == FamilyTag::LogisticExperimental;
    GlmFit fit;
    fit.beta.assign(d, 0.0);
    detail::ExactSum ysum;
    for (double yv : data.y) ysum.add(yv);
    const double ybar = ysum.value() / data.y.size();
    fit.beta[0] = logistic
                      ? std::log((ybar + 0.01) / (1.0 - ybar + 0.01))
                      : std::log(std::max(ybar, 1e-3));
    fit.mu.assign(data.y.size(), 0.0);

    for (int it = 0; it < 25; ++it) {
        std::vector<std::vector<detail::ExactSum>> a_xtwx(
            d, std::vector<detail::ExactSum>(d));
        std::vector<detail::ExactSum> a_xtwz(d);
        for (int i = 0; i < data.m; ++i) {
            for (int j = 0; j < data.n; ++j) {
                const double* x = data.xat(i, j);
                double eta = fit.beta[0];
                for (int k = 0; k < data.p; ++k) eta += fit.beta[k + 1] * x[k];
                eta = std::clamp(eta, -30.0, 30.0);
                double mu, w, z;
                if (logistic) {
                    mu = 1.0 / (1.0 + std::exp(-eta));
                    w = std::max(mu * (1.0 - mu), 1e-8);
                    z = eta + (data.yat(i, j) - mu) / w;
                } else {
                    mu = std::exp(eta);
                    // log link: z = eta + (y - mu)/mu; weight mu for Poisson,
                    // constant for Gamma
                    w = data.family.tag == FamilyTag::Poisson ? mu : 1.0;
                    z = eta + (data.yat(i, j) - mu) / mu;
                }
                fit.mu[static_cast<size_t>(i) * data.n + j] = mu;
                std::vector<double> xfull(d);
                xfull[0] = 1.0;
                for (int k = 0; k < data.p; ++k) xfull[k + 1] = x[k];
                for (int r = 0; r < d; ++r) {
                    a_xtwz[r].add(w * xfull[r] * z);
                    for (int c = 0; c < d; ++c)
                        a_xtwx[r][c].add(w * xfull[r] * xfull[c]);
                }
            }
        }
        std::vector<std::vector<double>> xtwx(d, std::vector<double>(d));
        std::vector<double> xtwz(d);
        for (int r = 0; r < d; ++r) {
            xtwz[r] = a_xtwz[r].value();
            for (int c = 0; c < d; ++c) xtwx[r][c] = a_xtwx[r][c].value();
        }
        std::vector<double> beta_new = solve_dense(std::move(xtwx), std::move(xtwz));
        double delta = 0.0;
        for (int r = 0; r < d; ++r) delta = std::max(delta, std::abs(beta_new[r] - fit.beta[r]));
        fit.beta = std::move(beta_new);
        for (double b : fit.beta)
            if (!std::isfinite(b)) throw std::runtime_error("GLM diverged");
        if (delta < 1e-10) break;
    }
    return fit;
}

// Variance seeds from row/column means of working residuals, floored.
void moment_variances(const Dataset& data, const GlmFit& glm, double& s2u,
                      double& s2v) {
    std::vector<detail::ExactSum> a_row(data.m), a_col(data.n);
    for (int i = 0; i < data.m; ++i) {
        for (int j = 0; j < data.n; ++j) {
            const double mu = glm.mu[static_cast<size_t>(i) * data.n + j];
            const double r = (data.yat(i, j) - mu) / std::max(mu, 1e-12);
            a_row[i].add(r / data.n);
            a_col[j].add(r / data.m);
        }
    }
    std::vector<double> row_mean(data.m), col_mean(data.n);
    for (int i = 0; i < data.m; ++i) row_mean[i] = a_row[i].value();
    for (int j = 0; j < data.n; ++j) col_mean[j] = a_col[j].value();
    auto var = [](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        detail::ExactSum ms;
        for (double x : v) ms.add(x);
        const double mean = ms.value() / v.size();
        detail::ExactSum acc;
        for (double x : v) acc.add((x - mean) * (x - mean));
        return acc.value() / (v.size() - 1);
    };
    // the upper clamp matters for sparse Poisson grids, where the
    // heavy-tailed working residuals can blow the seed far outside any
    // reasonable basin of attraction
    s2u = std::clamp(var(row_mean), 0.01, 1.0);
    s2v = std::clamp(var(col_mean), 0.01, 1.0);
}

}  // namespace

std::pair<ModelParams, VariationalParams> initialize_full(const Dataset& data,
                                                          InitStrategy strategy,
                                                          bool* fallback) {
    if (fallback) *fallback = false;
    ModelParams psi;
    psi.beta.assign(data.p + 1, 0.0);
    psi.sigma2_u = psi.sigma2_v = 1.0;
    VariationalParams xi = VariationalParams::zeros(data.m, data.n, 1.0);
    if (strategy == InitStrategy::Zeros) return {psi, xi};
    try {
        const GlmFit glm = glm_moments_fit(data);
        double s2u, s2v;
        moment_variances(data, glm, s2u, s2v);
        psi.beta = glm.beta;
        psi.sigma2_u = s2u;
        psi.sigma2_v = s2v;
        xi = VariationalParams::zeros(data.m, data.n);
        std::fill(xi.lam_u.begin(), xi.lam_u.end(), s2u);
        std::fill(xi.lam_v.begin(), xi.lam_v.end(), s2v);
    } catch (const std::exception&) {
        if (fallback) *fallback = true;
        psi.beta.assign(data.p + 1, 0.0);
        psi.sigma2_u = psi.sigma2_v = 1.0;
        xi = VariationalParams::zeros(data.m, data.n, 1.0);
    }
    return {psi, xi};
}

std::pair<CompositeParams, VariationalParams> initialize_composite(
    const Dataset& data, InitStrategy strategy, bool* fallback) {
    auto [psi, xi] = initialize_full(data, strategy, fallback);
    CompositeParams rc;
    rc.slopes.assign(psi.beta.begin() + 1, psi.beta.end());
    rc.sigma2_u = psi.sigma2_u;
    rc.sigma2_v = psi.sigma2_v;
    // seed the intercepts at their misspecified targets
    rc.beta0_r = psi.beta[0] + psi.sigma2_v / 2;
    rc.beta0_c = psi.beta[0] + psi.sigma2_u / 2;
    if (strategy == InitStrategy::Zeros) rc.beta0_r = rc.beta0_c = 0.0;
    return {rc, xi};
}

namespace {

struct PackedFit {
    std::vector<double> z;
    std::vector<double> trace;
    bool converged = false;
    int iters = 0;
};

PackedFit run_packed(const FitConfig& config, const ObjectiveFn& obj,
                     std::vector<double> z0,
                     size_t n_psi /* leading model-parameter coords */) {
    LbfgsOptions opts;
    opts.max_iters = config.max_iters;
    opts.rel_tol = config.rel_tol;
    opts.grad_tol = config.grad_tol;

    PackedFit out;
    if (!config.block_coordinate) {
        LbfgsResult r = lbfgs_maximize(obj, std::move(z0), opts);
        out.trace = std::move(r.trace);
        out.converged = r.converged;
        out.iters = r.iters;
        out.z = std::move(r.x);
    } else {
        // alternate xi-step / psi-step; debugging mode only
        std::vector<char> psi_mask(z0.size(), 0), xi_mask(z0.size(), 1);
        for (size_t k = 0; k < n_psi; ++k) {
            psi_mask[k] = 1;
            xi_mask[k] = 0;
        }
        LbfgsOptions inner = opts;
        inner.max_iters = 50;
        double prev = -std::numeric_limits<double>::infinity();
        for (int outer = 0; outer < config.max_iters; ++outer) {
            LbfgsResult rx = lbfgs_maximize_masked(obj, std::move(z0), xi_mask, inner);
            LbfgsResult rp =
                lbfgs_maximize_masked(obj, std::move(rx.x), psi_mask, inner);
            z0 = std::move(rp.x);
            out.trace.insert(out.trace.end(), rx.trace.begin(), rx.trace.end());
            out.trace.insert(out.trace.end(), rp.trace.begin() + 1,
                             rp.trace.end());
            out.iters = outer + 1;
            if (std::abs(rp.f - prev) <= opts.rel_tol * (std::abs(rp.f) + 1.0)) {
                out.converged = true;
                break;
            }
            prev = rp.f;
        }
        out.z = std::move(z0);
    }
    return out;
}

// --- profiled composite solver ---
//
// The composite bound separates: given the model parameters, each row's
// (mu_u[i], lam_u[i]) pair only enters its own row block, and likewise for
// columns. So instead of one joint optimization over p+4+2(m+n)
// coordinates, the outer L-BFGS runs over the p+4 model parameters alone
// and every evaluation solves the m+n independent two-variable subproblems
// by damped Newton. The envelope theorem makes the partial derivatives at
// the inner optimum the exact outer gradient. This is where the composite
// method's speed advantage over the full bound comes from.

// One row or column subproblem, after collapsing its block to sufficient
// statistics: f(mu, lam) = lin*mu - K*exp(sgn*mu + lam/2)
//             - (mu^2 + lam)/(2 s2) + log(lam)/2,
// maximized over mu and t with lam = kLambdaFloor + exp(t).
void solve_unit(double K, double lin, double sgn, double s2, double& mu,
                double& t) {
    auto eval = [&](double mu_, double lam_, double& q_) {
        q_ = K * std::exp(sgn * mu_ + lam_ / 2);
        return lin * mu_ - q_ - (mu_ * mu_ + lam_) / (2 * s2) +
               0.5 * std::log(lam_);
    };
    double lam = detail::from_log(t, detail::kLambdaFloor);
    double q = 0.0;
    double f = eval(mu, lam, q);
    if (!std::isfinite(f)) return;  // hopeless outer point; probe rejects it
    const double tol = 1e-11 * std::max(1.0, std::abs(lin));
    for (int it = 0; it < 100; ++it) {
        const double g_mu = lin - sgn * q - mu / s2;
        const double g_lam = -q / 2 + 0.5 / lam - 0.5 / s2;
        const double el = lam - detail::kLambdaFloor;
        const double g_t = g_lam * el;
        if (std::abs(g_mu) <= tol && std::abs(g_t) <= tol) break;
        const double h_mm = -q - 1.0 / s2;
        const double h_mt = -sgn * q / 2 * el;
        const double h_tt = (-q / 4 - 0.5 / (lam * lam)) * el * el + g_t;
        const double det = h_mm * h_tt - h_mt * h_mt;
        double dmu, dt;
        if (std::isfinite(det) && det > 0.0 && h_mm < 0.0) {
            dmu = -(h_tt * g_mu - h_mt * g_t) / det;
            dt = -(h_mm * g_t - h_mt * g_mu) / det;
        } else {
            // indefinite curvature: damped ascent step
            const double sc = 1.0 / (std::abs(h_mm) + 1.0);
            dmu = g_mu * sc;
            dt = g_t * sc;
        }
        dmu = std::clamp(dmu, -30.0, 30.0);
        dt = std::clamp(dt, -30.0, 30.0);
        double step = 1.0;
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt) {
            const double mu_n = mu + step * dmu;
            const double t_n = t + step * dt;
            if (mu_n == mu && t_n == t) break;
            const double lam_n = detail::from_log(t_n, detail::kLambdaFloor);
            double q_n = 0.0;
            const double f_n = eval(mu_n, lam_n, q_n);
            if (std::isfinite(f_n) && f_n >= f) {
                mu = mu_n;
                t = t_n;
                lam = lam_n;
                q = q_n;
                f = f_n;
                moved = true;
                break;
            }
            step /= 2;
        }
        if (!moved) break;
    }
}

class ProfiledComposite {
public:
    ProfiledComposite(const Dataset& data, const CompositeParams& rc0,
                      const VariationalParams& xi0)
        : data_(data), cell_(data.y.size()) {
        detail::ExactSum y_sum;
        for (double yv : data.y) y_sum.add(yv);
        y_total_ = y_sum.value();
        x_total_.assign(data.p, 0.0);
        yx_total_.assign(data.p, 0.0);
        for (int k = 0; k < data.p; ++k) {
            detail::ExactSum xs, yxs;
            for (int i = 0; i < data.m; ++i)
                for (int j = 0; j < data.n; ++j) {
                    const double xv = data.xat(i, j)[k];
                    xs.add(xv);
                    yxs.add(data.yat(i, j) * xv);
                }
            x_total_[k] = xs.value();
            yx_total_[k] = yxs.value();
        }
        row_y_.assign(data.m, 0.0);
        col_y_.assign(data.n, 0.0);
        {
            std::vector<detail::ExactSum> ry(data.m), cy(data.n);
            for (int i = 0; i < data.m; ++i)
                for (int j = 0; j < data.n; ++j) {
                    ry[i].add(data.yat(i, j));
                    cy[j].add(data.yat(i, j));
                }
            for (int i = 0; i < data.m; ++i) row_y_[i] = ry[i].value();
            for (int j = 0; j < data.n; ++j) col_y_[j] = cy[j].value();
        }
        mu_u_ = xi0.mu_u;
        mu_v_ = xi0.mu_v;
        t_u_.resize(data.m);
        t_v_.resize(data.n);
        for (int i = 0; i < data.m; ++i)
            t_u_[i] = detail::to_log(xi0.lam_u[i], detail::kLambdaFloor);
        for (int j = 0; j < data.n; ++j)
            t_v_[j] = detail::to_log(xi0.lam_v[j], detail::kLambdaFloor);
        (void)rc0;
    }

    // z = (b0r, b0c, slopes, log s2u, log s2v)
    double eval(const std::vector<double>& z, std::vector<double>& grad) {
        const int p = data_.p, m = data_.m, n = data_.n;
        const bool poisson = data_.family.tag == FamilyTag::Poisson;
        const double w = data_.family.weight();
        const double sgn = poisson ? 1.0 : -1.0;
        const double b0r = z[0], b0c = z[1];
        const double* sl = z.data() + 2;
        const double s2u = detail::from_log(z[p + 2], kSigma2Floor);
        const double s2v = detail::from_log(z[p + 3], kSigma2Floor);

        // one exponential pass; c_ij = exp(sgn * eta_r,ij) is cached for the
        // slope-gradient pass, and the column aggregates reuse it through
        // the intercept shift delta = exp(sgn (b0c - b0r))
        std::vector<detail::ExactSum> rowK(m), colK(n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) {
                const double* x = data_.xat(i, j);
                double xdot = b0r;
                for (int k = 0; k < p; ++k) xdot += sl[k] * x[k];
                const double c = guarded_exp(sgn * xdot);
                cell_[static_cast<size_t>(i) * n + j] = c;
                const double contrib = poisson ? c : data_.yat(i, j) * c;
                rowK[i].add(contrib);
                colK[j].add(contrib);
            }
        const double delta = guarded_exp(sgn * (b0c - b0r));
        std::vector<double> K_row(m), K_col(n);
        for (int i = 0; i < m; ++i) {
            K_row[i] = rowK[i].value();
            if (!std::isfinite(K_row[i]))
                throw OverflowError("composite row aggregate diverged");
        }
        for (int j = 0; j < n; ++j) {
            K_col[j] = delta * colK[j].value();
            if (!std::isfinite(K_col[j]))
                throw OverflowError("composite column aggregate diverged");
        }

        for (int i = 0; i < m; ++i)
            solve_unit(w * K_row[i], poisson ? row_y_[i] : -w * n, sgn, s2u,
                       mu_u_[i], t_u_[i]);
        for (int j = 0; j < n; ++j)
            solve_unit(w * K_col[j], poisson ? col_y_[j] : -w * m, sgn, s2v,
                       mu_v_[j], t_v_[j]);

        // value and gradient from the aggregates at the inner optimum
        detail::ExactSum sum_P_row, sum_P_col, sum_mu_r, sum_mu_c, pen_u,
            pen_v, pg_u, pg_v;
        std::vector<double> R(m), C(n);
        for (int i = 0; i < m; ++i) {
            const double lam = detail::from_log(t_u_[i], detail::kLambdaFloor);
            R[i] = std::exp(sgn * mu_u_[i] + lam / 2);
            sum_P_row.add(R[i] * K_row[i]);
            sum_mu_r.add(poisson ? row_y_[i] * mu_u_[i] : mu_u_[i]);
            pen_u.add(0.5 * (std::log(lam / s2u) -
                             (mu_u_[i] * mu_u_[i] + lam) / s2u));
            pg_u.add(-0.5 / s2u +
                     0.5 * (mu_u_[i] * mu_u_[i] + lam) / (s2u * s2u));
        }
        for (int j = 0; j < n; ++j) {
            const double lam = detail::from_log(t_v_[j], detail::kLambdaFloor);
            C[j] = std::exp(sgn * mu_v_[j] + lam / 2);
            sum_P_col.add(C[j] * K_col[j]);
            sum_mu_c.add(poisson ? col_y_[j] * mu_v_[j] : mu_v_[j]);
            pen_v.add(0.5 * (std::log(lam / s2v) -
                             (mu_v_[j] * mu_v_[j] + lam) / s2v));
            pg_v.add(-0.5 / s2v +
                     0.5 * (mu_v_[j] * mu_v_[j] + lam) / (s2v * s2v));
        }
        double sdx = 0.0, sdyx = 0.0;
        for (int k = 0; k < p; ++k) {
            sdx += sl[k] * x_total_[k];
            sdyx += sl[k] * yx_total_[k];
        }
        double f;
        if (poisson) {
            f = b0r * y_total_ + sdyx + sum_mu_r.value() - sum_P_row.value() +
                b0c * y_total_ + sdyx + sum_mu_c.value() - sum_P_col.value();
        } else {
            const double mn = static_cast<double>(m) * n;
            f = w * (-sum_P_row.value() -
                     (mn * b0r + sdx + n * sum_mu_r.value())) +
                w * (-sum_P_col.value() -
                     (mn * b0c + sdx + m * sum_mu_c.value()));
        }
        f += pen_u.value() + pen_v.value();

        grad.assign(p + 4, 0.0);
        if (poisson) {
            grad[0] = y_total_ - sum_P_row.value();
            grad[1] = y_total_ - sum_P_col.value();
        } else {
            const double mn = static_cast<double>(m) * n;
            grad[0] = w * (sum_P_row.value() - mn);
            grad[1] = w * (sum_P_col.value() - mn);
        }
        if (p > 0) {
            std::vector<detail::ExactSum> gsl(p);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j) {
                    const double* x = data_.xat(i, j);
                    const double c = cell_[static_cast<size_t>(i) * n + j];
                    const double y = data_.yat(i, j);
                    const double d = poisson
                                         ? 2 * y - c * (R[i] + delta * C[j])
                                         : w * (y * c * (R[i] + delta * C[j]) -
                                                2.0);
                    for (int k = 0; k < p; ++k) gsl[k].add(d * x[k]);
                }
            for (int k = 0; k < p; ++k) grad[2 + k] = gsl[k].value();
        }
        grad[p + 2] = pg_u.value() * std::exp(z[p + 2]);
        grad[p + 3] = pg_v.value() * std::exp(z[p + 3]);
        return f;
    }

    void extract(const std::vector<double>& z, CompositeParams& rc,
                 VariationalParams& xi) const {
        const int p = data_.p;
        rc.beta0_r = z[0];
        rc.beta0_c = z[1];
        rc.slopes.assign(z.begin() + 2, z.begin() + 2 + p);
        rc.sigma2_u = detail::from_log(z[p + 2], kSigma2Floor);
        rc.sigma2_v = detail::from_log(z[p + 3], kSigma2Floor);
        xi.mu_u = mu_u_;
        xi.mu_v = mu_v_;
        xi.lam_u.resize(data_.m);
        xi.lam_v.resize(data_.n);
        for (int i = 0; i < data_.m; ++i)
            xi.lam_u[i] = detail::from_log(t_u_[i], detail::kLambdaFloor);
        for (int j = 0; j < data_.n; ++j)
            xi.lam_v[j] = detail::from_log(t_v_[j], detail::kLambdaFloor);
    }

private:
    const Dataset& data_;
    std::vector<double> cell_;
    double y_total_ = 0.0;
    std::vector<double> x_total_, yx_total_, row_y_, col_y_;
    std::vector<double> mu_u_, t_u_, mu_v_, t_v_;  // inner warm state
};

}  // namespace

FitResult fit(const Dataset& data, const FitConfig& config) {
    data.validate();
    if (data.family.tag == FamilyTag::LogisticExperimental)
        throw UnsupportedFamilyError(
            "logistic data requires the experimental quadrature fit");
    if (config.method == Method::Gvacl && (data.m < 2 || data.n < 2))
        throw std::invalid_argument(
            "composite fit requires m >= 2 and n >= 2; the row/column "
            "decomposition is vacuous on a degenerate grid");

    const auto t0 = std::chrono::steady_clock::now();
    const int p = data.p, m = data.m, n = data.n;

    FitResult out;
    bool fallback = false;

    if (config.method == Method::FullGva) {
        auto [psi0, xi0] = initialize_full(data, config.init, &fallback);
        auto z0 = detail::pack_full(psi0, xi0);
        ModelParams psi_buf;
        VariationalParams xi_buf;
        FullGradient g_buf;
        ObjectiveFn obj = [&](const std::vector<double>& z,
                              std::vector<double>& grad) {
            detail::unpack_full(z, p, m, n, psi_buf, xi_buf);
            const double f = full_elbo(psi_buf, xi_buf, data);
            g_buf = full_elbo_grad(psi_buf, xi_buf, data);
            detail::chain_full(z, p, m, n, g_buf, grad);
            return f;
        };
        PackedFit pf = run_packed(config, obj, std::move(z0), p + 3);
        detail::unpack_full(pf.z, p, m, n, out.estimates, out.xi_hat);
        out.elbo_trace = std::move(pf.trace);
        out.converged = pf.converged;
        out.iters = pf.iters;
    } else {
        auto [rc0, xi0] = initialize_composite(data, config.init, &fallback);
        CompositeParams rc;
        if (!config.block_coordinate) {
            ProfiledComposite pc(data, rc0, xi0);
            std::vector<double> z0;
            z0.reserve(p + 4);
            z0.push_back(rc0.beta0_r);
            z0.push_back(rc0.beta0_c);
            z0.insert(z0.end(), rc0.slopes.begin(), rc0.slopes.end());
            z0.push_back(detail::to_log(rc0.sigma2_u, kSigma2Floor));
            z0.push_back(detail::to_log(rc0.sigma2_v, kSigma2Floor));
            ObjectiveFn obj = [&](const std::vector<double>& z,
                                  std::vector<double>& grad) {
                return pc.eval(z, grad);
            };
            LbfgsOptions opts;
            opts.max_iters = config.max_iters;
            opts.rel_tol = config.rel_tol;
            opts.grad_tol = config.grad_tol;
            LbfgsResult r = lbfgs_maximize(obj, std::move(z0), opts);
            // re-solve the inner problems at the returned point so the
            // stored variational state matches it
            std::vector<double> gtmp;
            pc.eval(r.x, gtmp);
            pc.extract(r.x, rc, out.xi_hat);
            out.elbo_trace = std::move(r.trace);
            out.converged = r.converged;
            out.iters = r.iters;
        } else {
            auto z0 = detail::pack_composite(rc0, xi0);
            CompositeParams rc_buf;
            VariationalParams xi_buf;
            CompositeGradient g_buf;
            ObjectiveFn obj = [&](const std::vector<double>& z,
                                  std::vector<double>& grad) {
                detail::unpack_composite(z, p, m, n, rc_buf, xi_buf);
                const double f = composite_elbo(rc_buf, xi_buf, data);
                g_buf = composite_elbo_grad(rc_buf, xi_buf, data);
                detail::chain_composite(z, p, m, n, g_buf, grad);
                return f;
            };
            PackedFit pf = run_packed(config, obj, std::move(z0), p + 4);
            detail::unpack_composite(pf.z, p, m, n, rc, out.xi_hat);
            out.elbo_trace = std::move(pf.trace);
            out.converged = pf.converged;
            out.iters = pf.iters;
        }
        out.estimates.beta.assign(p + 1, 0.0);
        out.estimates.beta[0] =
            recover_intercept(rc.beta0_r, rc.beta0_c, rc.sigma2_u, rc.sigma2_v);
        for (int k = 0; k < p; ++k) out.estimates.beta[k + 1] = rc.slopes[k];
        out.estimates.sigma2_u = rc.sigma2_u;
        out.estimates.sigma2_v = rc.sigma2_v;
        out.raw_composite = std::move(rc);
    }

    out.method = config.method;
    out.init_fallback = fallback;
    out.boundary = out.estimates.sigma2_u <= kSigma2Floor * (1 + 1e-9) ||
                   out.estimates.sigma2_v <= kSigma2Floor * (1 + 1e-9);
    out.wall_time_s = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    return out;
}

}  // namespace gvacl
