#include "gvacl/inference.hpp"

#include <cmath>

namespace gvacl {

double recover_intercept(double beta0_r, double beta0_c, double sigma2_u,
                         double sigma2_v) {
    if (!(sigma2_u > 0.0) || !(sigma2_v > 0.0))
        throw std::invalid_argument("variance components must be positive");
    return (beta0_r + beta0_c - sigma2_u / 2 - sigma2_v / 2) / 2;
}

namespace {

Matrix3 intercept_block(double s2) {
    if (!(s2 > 0.0))
        throw std::invalid_argument("variance component must be positive");
    const double e = std::exp(s2);
    Matrix3 g{};
    g[0][0] = 2 * (e - 1);
    g[0][1] = g[1][0] = 2 * s2;
    g[0][2] = g[2][0] = -s2 * s2;
    g[1][1] = 2 * s2;
    g[1][2] = g[2][1] = 0.0;
    g[2][2] = s2 * s2;
    for (auto& row : g)
        for (auto& v : row) v /= 8.0;
    return g;
}

double sum_entries3(const Matrix3& g) {
    double s = 0.0;
    for (const auto& row : g)
        for (double v : row) s += v;
    return s;
}

double sum_entries2(const Matrix2& g) {
    return g[0][0] + g[0][1] + g[1][0] + g[1][1];
}

}  // namespace

Matrix3 gamma1(double sigma2_u) { return intercept_block(sigma2_u); }
Matrix3 gamma2(double sigma2_v) { return intercept_block(sigma2_v); }

Matrix2 gamma3(double sigma2_u, double sigma2_v) {
    const double eu = std::exp(sigma2_u), ev = std::exp(sigma2_v);
    Matrix2 g{};
    g[0][0] = eu * (ev - 1);
    g[0][1] = g[1][0] = (eu - 1) * (ev - 1);
    g[1][1] = ev * (eu - 1);
    for (auto& row : g)
        for (auto& v : row) v /= 4.0;
    return g;
}

Matrix2 sigma_tilde(double alpha, double sigma2_u, double sigma2_v) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    const double eu = std::exp(sigma2_u), ev = std::exp(sigma2_v);
    Matrix2 s{};
    s[0][0] = alpha * (ev - 1) + ev;
    s[0][1] = s[1][0] = 1.0;
    s[1][1] = alpha * (eu - 1) + eu;
    for (auto& row : s)
        for (auto& v : row) v /= 4.0 * alpha;
    return s;
}

double se_beta0(double sigma2_u, double sigma2_v, int m, int n) {
    return std::sqrt(sum_entries3(gamma1(sigma2_u)) / m +
                     sum_entries3(gamma2(sigma2_v)) / n);
}

SigmaSe se_sigma(double sigma2, int count) {
    if (!(sigma2 > 0.0) || count < 1)
        throw std::invalid_argument("se_sigma needs sigma2 > 0 and count >= 1");
    SigmaSe out;
    out.se_of_variance = std::sqrt(2.0) * sigma2 / std::sqrt(double(count));
    out.se_of_sd = out.se_of_variance / (2.0 * std::sqrt(sigma2));
    return out;
}

double se_beta1_gamma(double alpha, double sigma2_u, double sigma2_v, int m,
                      int n) {
    return std::sqrt(sum_entries2(sigma_tilde(alpha, sigma2_u, sigma2_v)) /
                     (double(m) * n));
}

MgfSpec MgfSpec::normal(double mean, double sd) {
    MgfSpec s;
    s.is_normal_ = true;
    s.mean_ = mean;
    s.sd_ = sd;
    return s;
}

MgfSpec MgfSpec::empirical(std::vector<double> xs) {
    if (xs.empty())
        throw std::invalid_argument("empirical MGF needs observations");
    MgfSpec s;
    s.is_normal_ = false;
    s.xs_ = std::move(xs);
    return s;
}

double MgfSpec::phi(double t) const {
    if (is_normal_) return std::exp(mean_ * t + sd_ * sd_ * t * t / 2);
    double acc = 0.0;
    for (double x : xs_) acc += std::exp(t * x);
    return acc / xs_.size();
}

double MgfSpec::phi1(double t) const {
    if (is_normal_) return (mean_ + sd_ * sd_ * t) * phi(t);
    double acc = 0.0;
    for (double x : xs_) acc += x * std::exp(t * x);
    return acc / xs_.size();
}

double MgfSpec::phi2(double t) const {
    if (is_normal_) {
        const double lin = mean_ + sd_ * sd_ * t;
        return (sd_ * sd_ + lin * lin) * phi(t);
    }
    double acc = 0.0;
    for (double x : xs_) acc += x * x * std::exp(t * x);
    return acc / xs_.size();
}

std::string MgfSpec::describe() const {
    if (is_normal_)
        return "normal(" + std::to_string(mean_) + "," + std::to_string(sd_) + ")";
    return "empirical(" + std::to_string(xs_.size()) + " obs)";
}

double se_beta1_poisson(double beta0, double beta1, double sigma2_u,
                        double sigma2_v, int m, int n, const MgfSpec& mgf) {
    const double ph = mgf.phi(beta1);
    const double ph1 = mgf.phi1(beta1);
    const double ph2 = mgf.phi2(beta1);
    const double denom = ph2 * ph - ph1 * ph1;
    if (!(denom > 0.0))
        throw std::invalid_argument(
            "degenerate covariate law for the Poisson slope variance (" +
            mgf.describe() + "): phi2*phi - phi1^2 <= 0");
    const double tau1 = ph / denom;
    const double tau2 = mgf.phi2(2 * beta1) -
                        2 * ph1 * mgf.phi1(2 * beta1) / ph +
                        ph1 * ph1 * mgf.phi(2 * beta1) / (ph * ph);
    const double var = std::exp(-beta0 - sigma2_u / 2 - sigma2_v / 2) * tau1 +
                       tau1 * tau1 * tau2 * sum_entries2(gamma3(sigma2_u, sigma2_v));
    return std::sqrt(var / (double(m) * n));
}

AsymptoticSE standard_errors(const Family& family, const ModelParams& psi,
                             int m, int n, const MgfSpec& mgf) {
    AsymptoticSE out;
    out.se_beta0 = se_beta0(psi.sigma2_u, psi.sigma2_v, m, n);
    out.se_sigma_u = se_sigma(psi.sigma2_u, m).se_of_sd;
    out.se_sigma_v = se_sigma(psi.sigma2_v, n).se_of_sd;
    if (psi.beta.size() >= 2) {
        try {
            if (family.tag == FamilyTag::Gamma)
                out.se_beta1 = se_beta1_gamma(family.shape, psi.sigma2_u,
                                              psi.sigma2_v, m, n);
            else if (family.tag == FamilyTag::Poisson)
                out.se_beta1 = se_beta1_poisson(psi.beta[0], psi.beta[1],
                                                psi.sigma2_u, psi.sigma2_v, m, n,
                                                mgf);
        } catch (const std::exception&) {
            out.se_beta1.reset();
        }
    }
    return out;
}

}  // namespace gvacl
