#ifndef GVACL_BENCH_HPP
#define GVACL_BENCH_HPP

#include <optional>
#include <string>
#include <vector>

#include "gvacl/inference.hpp"
#include "gvacl/optimizer.hpp"
#include "gvacl/simulator.hpp"

namespace gvacl {

struct BenchConfig {
    SimSpec sim;               // per-replicate seed derived from sim.seed
    FitConfig fit;             // method field ignored; methods below
    std::vector<Method> methods;
    int reps = 100;
    int jobs = 1;
};

// One replicate's record, kept so reports can be audited.
struct Replicate {
    int index = 0;
    bool converged = false;
    double beta0 = 0.0, beta1 = 0.0, sigma_u = 0.0, sigma_v = 0.0;
    std::optional<AsymptoticSE> se;
    double wall_time_s = 0.0;
};

struct ParamStats {
    double mean = 0.0;
    std::optional<double> sd;    // empty when fewer than 2 converged reps
    std::optional<double> mese;  // mean of plug-in SEs; empty for full GVA
};

struct MethodReport {
    Method method = Method::Gvacl;
    ParamStats beta0, beta1, sigma_u, sigma_v;  // sigma on the SD scale
    double mean_time_s = 0.0;
    int failures = 0;
    int reps_used = 0;
    std::vector<Replicate> replicates;
};

struct BenchReport {
    BenchConfig config;
    std::vector<MethodReport> methods;

    std::string to_json() const;
    // Table with Mean(SD), MESE and Mean Time rows per method column.
    std::string render_table() const;
};

// Runs reps independent simulate+fit cycles per method in a pool of
// `jobs` workers. Statistics are aggregated over converged fits only, in
// replicate-index order, so results do not depend on `jobs`.
BenchReport run_bench(const BenchConfig& config);

}  // namespace gvacl

#endif
