// Internal helpers shared by the optimizer and the experimental logistic
// fit: flat parameter vectors with log-transformed variances.
#ifndef GVACL_PARAM_PACK_HPP
#define GVACL_PARAM_PACK_HPP

#include <cmath>
#include <vector>

#include "gvacl/data.hpp"
#include "gvacl/elbo.hpp"
#include "gvacl/optimizer.hpp"

namespace gvacl::detail {

inline constexpr double kLambdaFloor = 1e-12;

// smooth shifted-log transform: value = floor + exp(z). The floor is only
// approached asymptotically, so the gradient fades out instead of jumping
// to zero at a clamp.
inline double from_log(double z, double floor_val) {
    return floor_val + std::exp(z);
}
inline double from_log_factor(double z, double /*floor_val*/) {
    return std::exp(z);
}
inline double to_log(double v, double floor_val) {
    return std::log(std::max(v - floor_val, 1e-300));
}

// Full layout: beta(p+1), log s2u, log s2v, mu_u(m), log lam_u(m),
// mu_v(n), log lam_v(n).
inline std::vector<double> pack_full(const ModelParams& psi,
                                     const VariationalParams& xi) {
    std::vector<double> z;
    z.reserve(psi.beta.size() + 2 + 2 * xi.mu_u.size() + 2 * xi.mu_v.size());
    z.insert(z.end(), psi.beta.begin(), psi.beta.end());
    z.push_back(to_log(psi.sigma2_u, kSigma2Floor));
    z.push_back(to_log(psi.sigma2_v, kSigma2Floor));
    z.insert(z.end(), xi.mu_u.begin(), xi.mu_u.end());
    for (double l : xi.lam_u) z.push_back(to_log(l, kLambdaFloor));
    z.insert(z.end(), xi.mu_v.begin(), xi.mu_v.end());
    for (double l : xi.lam_v) z.push_back(to_log(l, kLambdaFloor));
    return z;
}

inline void unpack_full(const std::vector<double>& z, int p, int m, int n,
                        ModelParams& psi, VariationalParams& xi) {
    size_t k = 0;
    psi.beta.assign(z.begin(), z.begin() + (p + 1));
    k = p + 1;
    psi.sigma2_u = from_log(z[k++], kSigma2Floor);
    psi.sigma2_v = from_log(z[k++], kSigma2Floor);
    xi.mu_u.assign(z.begin() + k, z.begin() + k + m);
    k += m;
    xi.lam_u.resize(m);
    for (int i = 0; i < m; ++i) xi.lam_u[i] = from_log(z[k++], kLambdaFloor);
    xi.mu_v.assign(z.begin() + k, z.begin() + k + n);
    k += n;
    xi.lam_v.resize(n);
    for (int j = 0; j < n; ++j) xi.lam_v[j] = from_log(z[k++], kLambdaFloor);
}

inline void chain_full(const std::vector<double>& z, int p, int m, int n,
                       const FullGradient& g, std::vector<double>& out) {
    out.resize(z.size());
    size_t k = 0;
    for (int b = 0; b <= p; ++b) out[k++] = g.beta[b];
    out[k] = g.sigma2_u * from_log_factor(z[k], kSigma2Floor);
    ++k;
    out[k] = g.sigma2_v * from_log_factor(z[k], kSigma2Floor);
    ++k;
    for (int i = 0; i < m; ++i) out[k++] = g.mu_u[i];
    for (int i = 0; i < m; ++i) {
        out[k] = g.lam_u[i] * from_log_factor(z[k], kLambdaFloor);
        ++k;
    }
    for (int j = 0; j < n; ++j) out[k++] = g.mu_v[j];
    for (int j = 0; j < n; ++j) {
        out[k] = g.lam_v[j] * from_log_factor(z[k], kLambdaFloor);
        ++k;
    }
}

// Composite layout: beta0_r, beta0_c, slopes(p), log s2u, log s2v, then the
// variational block as above.
inline std::vector<double> pack_composite(const CompositeParams& psi,
                                          const VariationalParams& xi) {
    std::vector<double> z;
    z.reserve(psi.slopes.size() + 4 + 2 * xi.mu_u.size() + 2 * xi.mu_v.size());
    z.push_back(psi.beta0_r);
    z.push_back(psi.beta0_c);
    z.insert(z.end(), psi.slopes.begin(), psi.slopes.end());
    z.push_back(to_log(psi.sigma2_u, kSigma2Floor));
    z.push_back(to_log(psi.sigma2_v, kSigma2Floor));
    z.insert(z.end(), xi.mu_u.begin(), xi.mu_u.end());
    for (double l : xi.lam_u) z.push_back(to_log(l, kLambdaFloor));
    z.insert(z.end(), xi.mu_v.begin(), xi.mu_v.end());
    for (double l : xi.lam_v) z.push_back(to_log(l, kLambdaFloor));
    return z;
}

inline void unpack_composite(const std::vector<double>& z, int p, int m, int n,
                             CompositeParams& psi, VariationalParams& xi) {
    size_t k = 0;
    psi.beta0_r = z[k++];
    psi.beta0_c = z[k++];
    psi.slopes.assign(z.begin() + k, z.begin() + k + p);
    k += p;
    psi.sigma2_u = from_log(z[k++], kSigma2Floor);
    psi.sigma2_v = from_log(z[k++], kSigma2Floor);
    xi.mu_u.assign(z.begin() + k, z.begin() + k + m);
    k += m;
    xi.lam_u.resize(m);
    for (int i = 0; i < m; ++i) xi.lam_u[i] = from_log(z[k++], kLambdaFloor);
    xi.mu_v.assign(z.begin() + k, z.begin() + k + n);
    k += n;
    xi.lam_v.resize(n);
    for (int j = 0; j < n; ++j) xi.lam_v[j] = from_log(z[k++], kLambdaFloor);
}

inline void chain_composite(const std::vector<double>& z, int p, int m, int n,
                            const CompositeGradient& g,
                            std::vector<double>& out) {
    out.resize(z.size());
    size_t k = 0;
    out[k++] = g.beta0_r;
    out[k++] = g.beta0_c;
    for (int b = 0; b < p; ++b) out[k++] = g.slopes[b];
    out[k] = g.sigma2_u * from_log_factor(z[k], kSigma2Floor);
    ++k;
    out[k] = g.sigma2_v * from_log_factor(z[k], kSigma2Floor);
    ++k;
    for (int i = 0; i < m; ++i) out[k++] = g.mu_u[i];
    for (int i = 0; i < m; ++i) {
        out[k] = g.lam_u[i] * from_log_factor(z[k], kLambdaFloor);
        ++k;
    }
    for (int j = 0; j < n; ++j) out[k++] = g.mu_v[j];
    for (int j = 0; j < n; ++j) {
        out[k] = g.lam_v[j] * from_log_factor(z[k], kLambdaFloor);
        ++k;
    }
}

}  // namespace gvacl::detail

#endif
