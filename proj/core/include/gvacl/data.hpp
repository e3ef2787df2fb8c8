#ifndef GVACL_DATA_HPP
#define GVACL_DATA_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "gvacl/family.hpp"

namespace gvacl {

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Complete m x n response grid with per-cell covariate vectors of length p
// (the design excluding the intercept constant).
struct Dataset {
    int m = 0;
    int n = 0;
    int p = 0;
    Family family;
    std::vector<double> y;  // m*n, row-major
    std::vector<double> x;  // m*n*p, row-major by cell

    double yat(int i, int j) const { return y[static_cast<size_t>(i) * n + j]; }
    const double* xat(int i, int j) const {
        return x.data() + (static_cast<size_t>(i) * n + j) * p;
    }

    // Throws DataError if the grid is incomplete or a response violates the
    // family's domain.
    void validate() const;
};

// Psi = (beta, sigma2_u, sigma2_v); beta[0] is the intercept.
struct ModelParams {
    std::vector<double> beta;
    double sigma2_u = 1.0;
    double sigma2_v = 1.0;
};

// Psi^rc: two intercepts, shared slopes, and the variance components.
struct CompositeParams {
    double beta0_r = 0.0;
    double beta0_c = 0.0;
    std::vector<double> slopes;
    double sigma2_u = 1.0;
    double sigma2_v = 1.0;
};

// Per-row and per-column Gaussian variational means and variances.
struct VariationalParams {
    std::vector<double> mu_u;
    std::vector<double> lam_u;
    std::vector<double> mu_v;
    std::vector<double> lam_v;

    static VariationalParams zeros(int m, int n, double lam = 1.0);
};

// Sum of c(Y_ij, phi) over all cells; adding it to an ELBO makes the value
// comparable with a full log-likelihood.
double constant_offset(const Dataset& data, const Family& family);
inline double constant_offset(const Dataset& data) {
    return constant_offset(data, data.family);
}

}  // namespace gvacl

#endif
