#include "gvacl/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace gvacl {

namespace {

// Eigenvalues of the symmetric tridiagonal Jacobi matrix (implicit-shift QL)
// together with the first component of each eigenvector, which carries the
// quadrature weight.
void tridiag_eigen(std::vector<double>& d, std::vector<double>& e,
                   std::vector<double>& z) {
    const int n = static_cast<int>(d.size());
    e.push_back(0.0);
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 1e-16 * dd) break;
            }
            if (m != l) {
                if (iter++ == 50)
                    throw std::runtime_error("tridiagonal QL did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    f = z[i + 1];
                    z[i + 1] = s * z[i] + c * f;
                    z[i] = c * z[i] - s * f;
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    e.pop_back();
}

QuadRule build_rule(int n) {
    // probabilists' Hermite recurrence: diagonal 0, off-diagonal sqrt(k)
    std::vector<double> d(n, 0.0), e(n > 1 ? n - 1 : 0), z(n, 0.0);
    for (int k = 1; k < n; ++k) e[k - 1] = std::sqrt(double(k));
    z[0] = 1.0;
    tridiag_eigen(d, e, z);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return d[a] < d[b]; });

    QuadRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    double wsum = 0.0;
    for (int k = 0; k < n; ++k) {
        rule.nodes[k] = d[order[k]];
        rule.weights[k] = z[order[k]] * z[order[k]];
        wsum += rule.weights[k];
    }
    for (double& w : rule.weights) w /= wsum;  // exact sum 1 against N(0,1)
    return rule;
}

std::mutex g_rule_mutex;
std::map<int, QuadRule> g_rule_cache;

double softplus(double x) {
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

const QuadRule& gauss_hermite(int N) {
    if (N < 1 || N > 100)
        throw std::invalid_argument("gauss_hermite: N must be in [1, 100]");
    std::lock_guard<std::mutex> lock(g_rule_mutex);
    auto it = g_rule_cache.find(N);
    if (it == g_rule_cache.end())
        it = g_rule_cache.emplace(N, build_rule(N)).first;
    return it->second;
}

double aghq_1d(const std::function<double(double)>& log_f, double mode,
               double curvature, int N) {
    if (!(curvature > 0.0))
        throw std::invalid_argument("aghq_1d: curvature must be positive");
    const QuadRule& rule = gauss_hermite(N);
    const double scale = 1.0 / std::sqrt(curvature);
    const double log_norm = 0.5 * std::log(2.0 * M_PI / curvature);

    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(rule.nodes.size());
    for (size_t k = 0; k < rule.nodes.size(); ++k) {
        const double x = rule.nodes[k];
        const double fx = log_f(mode + scale * x);
        if (std::isnan(fx) || fx == std::numeric_limits<double>::infinity())
            throw std::runtime_error("aghq_1d: non-finite integrand at a node");
        terms[k] = std::log(rule.weights[k]) + fx + log_norm + x * x / 2.0;
        best = std::max(best, terms[k]);
    }
    if (!std::isfinite(best)) return best;  // integrand vanished everywhere
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - best);
    return best + std::log(acc);
}

double find_mode_1d(const std::function<double(double)>& log_f, double x0,
                    double* curvature_out) {
    double x = x0;
    const auto deriv = [&](double t, double& d1, double& d2) {
        const double h = 1e-5 * (1.0 + std::abs(t));
        const double fp = log_f(t + h), fm = log_f(t - h), f0 = log_f(t);
        d1 = (fp - fm) / (2 * h);
        d2 = (fp - 2 * f0 + fm) / (h * h);
    };
    for (int it = 0; it < 20; ++it) {
        double d1, d2;
        deriv(x, d1, d2);
        if (!std::isfinite(d1) || !std::isfinite(d2))
            throw std::runtime_error("mode search hit a non-finite region");
        double step = d2 < 0 ? -d1 / d2 : d1;  // fall back to ascent step
        step = std::clamp(step, -5.0, 5.0);
        // safeguard: halve until the objective does not decrease
        double f_cur = log_f(x);
        double x_new = x + step;
        for (int bt = 0; bt < 30 && log_f(x_new) < f_cur; ++bt)
            x_new = x + (step /= 2);
        if (std::abs(x_new - x) < 1e-12 * (1.0 + std::abs(x))) {
            x = x_new;
            break;
        }
        x = x_new;
    }
    double d1, d2;
    deriv(x, d1, d2);
    if (!(d2 < 0.0))
        throw std::runtime_error("mode search ended at non-concave point");
    if (curvature_out) *curvature_out = -d2;
    return x;
}

double logistic_e_btheta_2d(double eta, double mu_u, double lam_u, double mu_v,
                            double lam_v, int n1, int n2) {
    if (!(lam_u >= 0.0) || !(lam_v >= 0.0))
        throw std::invalid_argument("variational variances must be nonnegative");
    const QuadRule& r1 = gauss_hermite(n1);
    const QuadRule& r2 = gauss_hermite(n2);
    const double su = std::sqrt(lam_u), sv = std::sqrt(lam_v);
    double acc = 0.0;
    for (int a = 0; a < n1; ++a) {
        const double ua = mu_u + su * r1.nodes[a];
        double inner = 0.0;
        for (int b = 0; b < n2; ++b)
            inner += r2.weights[b] * softplus(eta + ua + mu_v + sv * r2.nodes[b]);
        acc += r1.weights[a] * inner;
    }
    return acc;
}

}  // namespace gvacl
