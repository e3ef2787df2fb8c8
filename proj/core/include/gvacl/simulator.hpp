#ifndef GVACL_SIMULATOR_HPP
#define GVACL_SIMULATOR_HPP

#include <cstdint>
#include <vector>

#include "gvacl/data.hpp"

namespace gvacl {

struct CovariateLaw {
    enum class Kind { Normal, FromFile };
    Kind kind = Kind::Normal;
    double mean = 1.0;
    double sd = 1.0;
    std::vector<double> values;  // m*n*p row-major, FromFile only

    static CovariateLaw normal(double mean, double sd) {
        return {Kind::Normal, mean, sd, {}};
    }
    static CovariateLaw from_values(std::vector<double> v) {
        return {Kind::FromFile, 0.0, 0.0, std::move(v)};
    }
};

struct SimSpec {
    Family family;
    int m = 0;
    int n = 0;
    std::vector<double> beta;  // truth, intercept first
    double sigma_u = 0.5;      // SD scale
    double sigma_v = 0.5;
    CovariateLaw covariate_law = CovariateLaw::normal(1.0, 1.0);
    std::uint64_t seed = 0;
};

struct Simulation {
    Dataset data;
    std::vector<double> u;  // realized row effects
    std::vector<double> v;  // realized column effects
    SimSpec spec;
};

Simulation simulate(const SimSpec& spec);

// Stream seed for replicate `index` of a run seeded with `base`, so
// replicates are reproducible regardless of execution order.
std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t index);

}  // namespace gvacl

#endif
