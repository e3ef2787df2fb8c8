#include "gvacl/simulator.hpp"

#include <cmath>
#include <random>

namespace gvacl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(splitmix64(base) ^ splitmix64(index + 1));
}

Simulation simulate(const SimSpec& spec) {
    if (spec.m <= 0 || spec.n <= 0)
        throw std::invalid_argument("simulation grid must be nonempty");
    if (!(spec.sigma_u > 0.0) || !(spec.sigma_v > 0.0))
        throw std::invalid_argument("sigma_u and sigma_v must be positive");
    if (spec.beta.empty())
        throw std::invalid_argument("truth beta must include an intercept");
    const int p = static_cast<int>(spec.beta.size()) - 1;
    const size_t cells = static_cast<size_t>(spec.m) * spec.n;
    if (spec.covariate_law.kind == CovariateLaw::Kind::FromFile &&
        spec.covariate_law.values.size() != cells * static_cast<size_t>(p))
        throw std::invalid_argument("covariate file size does not match grid");

    std::mt19937_64 rng(splitmix64(spec.seed));
    std::normal_distribution<double> std_normal(0.0, 1.0);

    Simulation sim;
    sim.spec = spec;
    sim.u.resize(spec.m);
    sim.v.resize(spec.n);
    for (double& u : sim.u) u = spec.sigma_u * std_normal(rng);
    for (double& v : sim.v) v = spec.sigma_v * std_normal(rng);

    Dataset& data = sim.data;
    data.m = spec.m;
    data.n = spec.n;
    data.p = p;
    data.family = spec.family;
    data.x.resize(cells * p);
    data.y.resize(cells);

    if (spec.covariate_law.kind == CovariateLaw::Kind::FromFile) {
        data.x = spec.covariate_law.values;
    } else {
        for (double& x : data.x)
            x = spec.covariate_law.mean + spec.covariate_law.sd * std_normal(rng);
    }

    for (int i = 0; i < spec.m; ++i) {
        for (int j = 0; j < spec.n; ++j) {
            double eta = spec.beta[0] + sim.u[i] + sim.v[j];
            const double* x = data.xat(i, j);
            for (int k = 0; k < p; ++k) eta += spec.beta[k + 1] * x[k];
            double& y = data.y[static_cast<size_t>(i) * spec.n + j];
            switch (spec.family.tag) {
                case FamilyTag::Poisson: {
                    const double mean = guarded_exp(eta);
                    std::poisson_distribution<long long> pois(mean);
                    y = static_cast<double>(pois(rng));
                    break;
                }
                case FamilyTag::Gamma: {
                    const double mean = guarded_exp(eta);
                    // shape alpha, scale mean/alpha, so E[Y] = mean exactly
                    std::gamma_distribution<double> gam(spec.family.shape,
                                                        mean / spec.family.shape);
                    do {
                        y = gam(rng);
                    } while (!(y > 0.0));  // guard against underflow to 0
                    break;
                }
                case FamilyTag::LogisticExperimental: {
                    const double prob = 1.0 / (1.0 + std::exp(-eta));
                    std::bernoulli_distribution bern(prob);
                    y = bern(rng) ? 1.0 : 0.0;
                    break;
                }
            }
        }
    }
    return sim;
}

}  // namespace gvacl
