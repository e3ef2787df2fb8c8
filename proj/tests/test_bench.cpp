#include <doctest.h>

#include <cmath>

#include "gvacl/bench.hpp"

using namespace gvacl;

namespace {

BenchConfig small_config(int reps, int jobs) {
    BenchConfig cfg;
    cfg.sim.family = Family::poisson();
    cfg.sim.m = cfg.sim.n = 10;
    cfg.sim.beta = {-0.5, -0.5};
    cfg.sim.sigma_u = cfg.sim.sigma_v = 0.5;
    cfg.sim.covariate_law = CovariateLaw::normal(1.0, 1.0);
    cfg.sim.seed = 314;
    cfg.methods = {Method::FullGva, Method::Gvacl};
    cfg.reps = reps;
    cfg.jobs = jobs;
    return cfg;
}

void recompute_and_compare(const MethodReport& rep) {
    double sum = 0.0;
    int used = 0;
    for (const Replicate& r : rep.replicates)
        if (r.converged) {
            sum += r.beta1;
            ++used;
        }
    REQUIRE(used == rep.reps_used);
    const double mean = sum / used;
    CHECK(std::abs(mean - rep.beta1.mean) < 1e-12);
    if (used >= 2) {
        double acc = 0.0;
        for (const Replicate& r : rep.replicates)
            if (r.converged) acc += (r.beta1 - mean) * (r.beta1 - mean);
        REQUIRE(rep.beta1.sd.has_value());
        CHECK(std::abs(std::sqrt(acc / (used - 1)) - *rep.beta1.sd) < 1e-12);
    }
}

}  // namespace

TEST_CASE("single replicate leaves the SD undefined") {
    const BenchReport report = run_bench(small_config(1, 1));
    REQUIRE(report.methods.size() == 2);
    for (const MethodReport& rep : report.methods) {
        CHECK(rep.replicates.size() == 1);
        CHECK(!rep.beta0.sd.has_value());
        CHECK(!rep.beta1.sd.has_value());
    }
    CHECK(report.to_json().find("null") != std::string::npos);
}

TEST_CASE("statistics are invariant to the worker count") {
    const BenchReport serial = run_bench(small_config(8, 1));
    const BenchReport pooled = run_bench(small_config(8, 4));
    REQUIRE(serial.methods.size() == pooled.methods.size());
    for (size_t k = 0; k < serial.methods.size(); ++k) {
        const MethodReport& a = serial.methods[k];
        const MethodReport& b = pooled.methods[k];
        CHECK(a.reps_used == b.reps_used);
        CHECK(a.failures == b.failures);
        CHECK(a.beta0.mean == b.beta0.mean);
        CHECK(a.beta1.mean == b.beta1.mean);
        CHECK(a.sigma_u.mean == b.sigma_u.mean);
        CHECK(a.sigma_v.mean == b.sigma_v.mean);
        REQUIRE(a.beta1.sd.has_value());
        CHECK(*a.beta1.sd == *b.beta1.sd);
        for (size_t r = 0; r < a.replicates.size(); ++r) {
            CHECK(a.replicates[r].index == b.replicates[r].index);
            CHECK(a.replicates[r].beta1 == b.replicates[r].beta1);
        }
    }
}

TEST_CASE("aggregates match a naive recomputation") {
    const BenchReport report = run_bench(small_config(10, 2));
    for (const MethodReport& rep : report.methods) recompute_and_compare(rep);
}

TEST_CASE("plug-in SEs are summarized for the composite method only") {
    const BenchReport report = run_bench(small_config(4, 2));
    for (const MethodReport& rep : report.methods) {
        if (rep.method == Method::Gvacl) {
            CHECK(rep.beta0.mese.has_value());
            CHECK(rep.sigma_u.mese.has_value());
            CHECK(*rep.beta0.mese > 0.0);
        } else {
            CHECK(!rep.beta0.mese.has_value());
        }
    }
}

TEST_CASE("report serialization") {
    const BenchReport report = run_bench(small_config(2, 1));
    const std::string json = report.to_json();
    for (const char* key :
         {"\"family\"", "\"reps\"", "\"methods\"", "\"gva\"", "\"gvacl\"",
          "\"mean\"", "\"sd\"", "\"mese\"", "\"mean_time_s\"", "\"failures\""})
        CHECK(json.find(key) != std::string::npos);

    const std::string table = report.render_table();
    CHECK(table.find("Mean(SD)") != std::string::npos);
    CHECK(table.find("MESE") != std::string::npos);
    CHECK(table.find("Mean Time") != std::string::npos);
}
