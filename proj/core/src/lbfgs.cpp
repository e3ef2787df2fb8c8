#include "gvacl/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "exact_sum.hpp"
#include "gvacl/family.hpp"

namespace gvacl {

namespace {

// order-invariant, so permuting coordinate blocks permutes the whole
// optimization trajectory bit for bit
double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return detail::exact_dot(a, b);
}

double max_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

struct Pair {
    std::vector<double> s, y;
    double rho;
};

// One trial evaluation of phi(t) = -f(x + t d) during the line search.
struct Trial {
    double t = 0.0;
    double phi = 0.0;   // -f, +inf when the objective overflowed
    double dphi = 0.0;  // directional derivative of phi, valid when finite
    bool ok = false;
};

}  // namespace

LbfgsResult lbfgs_maximize(const ObjectiveFn& fg, std::vector<double> x0,
                           const LbfgsOptions& opts) {
    std::vector<char> mask(x0.size(), 1);
    return lbfgs_maximize_masked(fg, std::move(x0), mask, opts);
}

// Internally minimizes -f with the standard two-loop recursion and a strong
// Wolfe line search (bracketing plus bisection zoom). Masked coordinates have
// their gradient zeroed so they never move.
LbfgsResult lbfgs_maximize_masked(const ObjectiveFn& fg, std::vector<double> x0,
                                  const std::vector<char>& mask,
                                  const LbfgsOptions& opts) {
    const size_t dim = x0.size();
    const double c1 = opts.armijo_c;
    const double c2 = 0.9;  // curvature constant for quasi-Newton methods
    LbfgsResult res;
    res.x = std::move(x0);

    std::vector<double> grad(dim, 0.0);
    double f = fg(res.x, grad);  // initial point must be evaluable; throws otherwise
    for (size_t i = 0; i < dim; ++i)
        if (!mask[i]) grad[i] = 0.0;
    res.trace.push_back(f);

    std::deque<Pair> memory;
    std::vector<double> gm(dim), d(dim), x_new(dim), grad_new(dim);
    for (size_t i = 0; i < dim; ++i) gm[i] = -grad[i];

    double gamma = 1.0;  // initial inverse-Hessian scaling
    int small_steps = 0;  // consecutive below-tolerance objective changes
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        res.iters = iter;
        if (max_norm(grad) <= opts.grad_tol) {
            res.converged = true;
            res.message = "gradient tolerance reached";
            break;
        }

        // two-loop recursion: d = -H * gm
        d = gm;
        std::vector<double> alpha(memory.size());
        for (size_t k = memory.size(); k-- > 0;) {
            alpha[k] = memory[k].rho * dot(memory[k].s, d);
            for (size_t i = 0; i < dim; ++i) d[i] -= alpha[k] * memory[k].y[i];
        }
        for (size_t i = 0; i < dim; ++i) d[i] *= gamma;
        for (size_t k = 0; k < memory.size(); ++k) {
            const double beta = memory[k].rho * dot(memory[k].y, d);
            for (size_t i = 0; i < dim; ++i)
                d[i] += (alpha[k] - beta) * memory[k].s[i];
        }
        for (size_t i = 0; i < dim; ++i) d[i] = -d[i];

        double slope = dot(d, gm);  // dphi(0), phi(t) = -f(x + t d)
        if (!(slope < 0.0)) {
            // not a descent direction; drop memory and fall back to steepest
            memory.clear();
            gamma = 1.0;
            for (size_t i = 0; i < dim; ++i) d[i] = -gm[i];
            slope = dot(d, gm);
            if (!(slope < 0.0)) {
                res.converged = true;
                res.message = "stationary (zero gradient direction)";
                break;
            }
        }

        const double phi0 = -f;
        auto probe = [&](double t) {
            Trial tr;
            tr.t = t;
            for (size_t i = 0; i < dim; ++i)
                x_new[i] = res.x[i] + (mask[i] ? t * d[i] : 0.0);
            try {
                const double ft = fg(x_new, grad_new);
                if (std::isfinite(ft)) {
                    for (size_t i = 0; i < dim; ++i)
                        if (!mask[i]) grad_new[i] = 0.0;
                    tr.ok = true;
                    tr.phi = -ft;
                    tr.dphi = -dot(grad_new, d);
                }
            } catch (const OverflowError&) {
            }
            if (!tr.ok) tr.phi = std::numeric_limits<double>::infinity();
            return tr;
        };
        // bracketing phase
        Trial accepted;
        bool have_accept = false;
        double lo_t = 0.0, lo_phi = phi0, hi_t = -1.0;
        {
            double t = 1.0, t_prev = 0.0, phi_prev = phi0;
            for (int k = 0; k < 12; ++k) {
                Trial tr = probe(t);
                if (!tr.ok || tr.phi > phi0 + c1 * t * slope ||
                    (k > 0 && tr.phi >= phi_prev)) {
                    hi_t = t;  // minimum bracketed in (t_prev, t)
                    break;
                }
                if (std::abs(tr.dphi) <= c2 * std::abs(slope)) {
                    accepted = tr;
                    have_accept = true;
                    break;
                }
                lo_t = t;
                lo_phi = tr.phi;
                if (tr.dphi >= 0.0) {
                    hi_t = t_prev;  // bracket reversed
                    break;
                }
                t_prev = t;
                phi_prev = tr.phi;
                t *= 2.0;
            }
            if (!have_accept && hi_t < 0.0) hi_t = t;  // expansion exhausted
        }

        // zoom phase: bisect the bracket until the strong Wolfe conditions
        // hold or the interval degenerates
        if (!have_accept) {
            for (int k = 0; k < opts.max_backtracks; ++k) {
                const double t = 0.5 * (lo_t + hi_t);
                if (t <= 0.0 || std::abs(hi_t - lo_t) <
                                    1e-16 * std::max(1.0, std::abs(lo_t)))
                    break;
                Trial tr = probe(t);
                if (!tr.ok || tr.phi > phi0 + c1 * t * slope ||
                    tr.phi >= lo_phi) {
                    hi_t = t;
                    continue;
                }
                if (std::abs(tr.dphi) <= c2 * std::abs(slope)) {
                    accepted = tr;
                    have_accept = true;
                    break;
                }
                if (tr.dphi * (hi_t - lo_t) >= 0.0) hi_t = lo_t;
                lo_t = t;
                lo_phi = tr.phi;
            }
            if (!have_accept && lo_t > 0.0 && lo_phi < phi0) {
                // settle for the best sufficient-decrease point
                accepted = probe(lo_t);
                have_accept = accepted.ok && accepted.phi <= lo_phi + 1e-12;
            }
        }
        if (!have_accept) {
            if (!memory.empty()) {
                // the quasi-Newton direction may be stale; retry from a
                // fresh steepest-descent state before giving up
                memory.clear();
                gamma = 1.0;
                continue;
            }
            res.message = "line search failed to make progress";
            break;
        }
        // the accepted trial was always the most recent probe, so x_new and
        // grad_new already hold its state
        const double f_new = -accepted.phi;

        // curvature pair for the minimization of -f
        Pair pr;
        pr.s.resize(dim);
        pr.y.resize(dim);
        for (size_t i = 0; i < dim; ++i) {
            pr.s[i] = x_new[i] - res.x[i];
            pr.y[i] = -grad_new[i] - gm[i];
        }
        const double sy = dot(pr.s, pr.y);
        if (sy > 1e-12) {
            pr.rho = 1.0 / sy;
            gamma = sy / dot(pr.y, pr.y);
            memory.push_back(std::move(pr));
            if (static_cast<int>(memory.size()) > opts.memory) memory.pop_front();
        }

        const double df = f_new - f;
        res.x = x_new;
        f = f_new;
        grad = grad_new;
        for (size_t i = 0; i < dim; ++i) gm[i] = -grad[i];
        res.trace.push_back(f);

        // one tiny change can be a collapsed line search far from the
        // optimum, so ask for two in a row
        small_steps = std::abs(df) <= opts.rel_tol * (std::abs(f) + 1.0)
                          ? small_steps + 1
                          : 0;
        if (small_steps >= 2) {
            res.converged = true;
            res.message = "objective change below tolerance";
            res.iters = iter + 1;
            break;
        }
    }
    if (res.message.empty()) res.message = "iteration limit reached";
    res.f = f;
    return res;
}

}  // namespace gvacl
