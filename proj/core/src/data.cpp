#include "gvacl/data.hpp"

#include <cmath>

namespace gvacl {

void Dataset::validate() const {
    if (m <= 0 || n <= 0 || p < 0)
        throw DataError("dataset dimensions must be positive");
    const size_t cells = static_cast<size_t>(m) * n;
    if (y.size() != cells)
        throw DataError("response grid has " + std::to_string(y.size()) +
                        " cells, expected " + std::to_string(cells));
    if (x.size() != cells * static_cast<size_t>(p))
        throw DataError("covariate grid size mismatch");
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            const double yij = yat(i, j);
            if (!std::isfinite(yij))
                throw DataError("non-finite response at (" + std::to_string(i + 1) +
                                "," + std::to_string(j + 1) + ")");
            switch (family.tag) {
                case FamilyTag::Poisson:
                    if (!(yij >= 0.0) || std::floor(yij) != yij)
                        throw DataError("Poisson response at (" +
                                        std::to_string(i + 1) + "," +
                                        std::to_string(j + 1) +
                                        ") is not a nonnegative integer");
                    break;
                case FamilyTag::Gamma:
                    if (!(yij > 0.0))
                        throw DataError("Gamma response at (" +
                                        std::to_string(i + 1) + "," +
                                        std::to_string(j + 1) +
                                        ") is not positive");
                    break;
                case FamilyTag::LogisticExperimental:
                    if (yij != 0.0 && yij != 1.0)
                        throw DataError("logistic response at (" +
                                        std::to_string(i + 1) + "," +
                                        std::to_string(j + 1) + ") is not 0/1");
                    break;
            }
        }
    }
}

VariationalParams VariationalParams::zeros(int m, int n, double lam) {
    VariationalParams xi;
    xi.mu_u.assign(m, 0.0);
    xi.lam_u.assign(m, lam);
    xi.mu_v.assign(n, 0.0);
    xi.lam_v.assign(n, lam);
    return xi;
}

double constant_offset(const Dataset& data, const Family& family) {
    double acc = 0.0;
    for (double yij : data.y) acc += log_density_constant(family, yij);
    return acc;
}

}  // namespace gvacl
