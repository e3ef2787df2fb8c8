#ifndef GVACL_LBFGS_HPP
#define GVACL_LBFGS_HPP

#include <functional>
#include <string>
#include <vector>

namespace gvacl {

struct LbfgsOptions {
    int max_iters = 500;
    double rel_tol = 1e-8;   // relative change of the objective
    double grad_tol = 1e-6;  // max-norm of the gradient
    int memory = 10;
    double armijo_c = 1e-4;
    int max_backtracks = 60;
};

struct LbfgsResult {
    std::vector<double> x;
    double f = 0.0;
    std::vector<double> trace;  // objective value per accepted iterate
    bool converged = false;
    int iters = 0;
    std::string message;
};

// Objective callback: fills grad (same length as x) and returns the value.
// May throw OverflowError to signal a diverging trial point; the line
// search treats that as a rejected step.
using ObjectiveFn =
    std::function<double(const std::vector<double>& x, std::vector<double>& grad)>;

// Limited-memory quasi-Newton ascent with Armijo backtracking (halving).
LbfgsResult lbfgs_maximize(const ObjectiveFn& fg, std::vector<double> x0,
                           const LbfgsOptions& opts);

// Like lbfgs_maximize but only the coordinates with mask[i] true are free;
// the rest stay fixed at their x0 values. Used by the block-coordinate
// debugging mode.
LbfgsResult lbfgs_maximize_masked(const ObjectiveFn& fg, std::vector<double> x0,
                                  const std::vector<char>& mask,
                                  const LbfgsOptions& opts);

}  // namespace gvacl

#endif
