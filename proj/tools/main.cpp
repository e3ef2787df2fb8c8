// gvacl command line tool: simulate crossed-random-effects data, fit the
// full or composite variational estimator, and run the replication bench.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gvacl/bench.hpp"
#include "gvacl/csv.hpp"
#include "gvacl/inference.hpp"
#include "gvacl/logistic.hpp"
#include "gvacl/optimizer.hpp"
#include "gvacl/simulator.hpp"

namespace {

using gvacl::Family;
using gvacl::FamilyTag;
using gvacl::Method;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNoConverge = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Family parse_family(const std::string& name, std::optional<double> alpha) {
    if (name == "poisson") {
        if (alpha) throw UsageError("--alpha is only valid with --family gamma");
        return Family::poisson();
    }
    if (name == "gamma") {
        if (!alpha) throw UsageError("--family gamma requires --alpha");
        return Family::gamma(*alpha);
    }
    if (name == "logistic") {
        if (alpha) throw UsageError("--alpha is only valid with --family gamma");
        return Family::logistic_experimental();
    }
    throw UsageError("unknown family '" + name +
                     "' (expected poisson, gamma or logistic)");
}

std::vector<Method> parse_methods(const std::string& csv) {
    std::vector<Method> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "gva")
            out.push_back(Method::FullGva);
        else if (tok == "gvacl")
            out.push_back(Method::Gvacl);
        else
            throw UsageError("unknown method '" + tok +
                             "' (expected gva or gvacl)");
    }
    if (out.empty()) throw UsageError("--methods must name at least one method");
    return out;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string sidecar_path(const std::string& csv_path) {
    const std::string suffix = ".csv";
    if (csv_path.size() > suffix.size() &&
        csv_path.compare(csv_path.size() - suffix.size(), suffix.size(),
                         suffix) == 0)
        return csv_path.substr(0, csv_path.size() - suffix.size()) +
               ".truth.json";
    return csv_path + ".truth.json";
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string family = "poisson";
    int m = 50, n = 50;
    double beta0 = -2.0, beta1 = -2.0;
    double sigma_u = 0.5, sigma_v = 0.5;
    std::optional<double> alpha;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
    gvacl::SimSpec spec;
    spec.family = parse_family(a.family, a.alpha);
    spec.m = a.m;
    spec.n = a.n;
    spec.beta = {a.beta0, a.beta1};
    spec.sigma_u = a.sigma_u;
    spec.sigma_v = a.sigma_v;
    spec.covariate_law = gvacl::CovariateLaw::normal(1.0, 1.0);
    spec.seed = a.seed;

    const gvacl::Simulation sim = gvacl::simulate(spec);
    gvacl::write_csv_file(a.out, sim.data);

    ordered_json truth;
    truth["family"] = spec.family.name();
    if (spec.family.tag == FamilyTag::Gamma) truth["alpha"] = spec.family.shape;
    truth["m"] = spec.m;
    truth["n"] = spec.n;
    truth["beta0"] = a.beta0;
    truth["beta1"] = a.beta1;
    truth["sigma_u"] = a.sigma_u;
    truth["sigma_v"] = a.sigma_v;
    truth["seed"] = spec.seed;
    ordered_json realized;
    realized["u_mean"] = mean_of(sim.u);
    realized["u_sd"] = sd_of(sim.u);
    realized["v_mean"] = mean_of(sim.v);
    realized["v_sd"] = sd_of(sim.v);
    truth["realized_effects"] = realized;

    const std::string truth_path = sidecar_path(a.out);
    std::ofstream tf(truth_path);
    if (!tf) throw gvacl::DataError("cannot write " + truth_path);
    tf << truth.dump(2) << "\n";
    std::cerr << "wrote " << a.out << " and " << truth_path << "\n";
    return 0;
}

// --- fit --------------------------------------------------------------------

struct FitArgs {
    std::string method = "gvacl";
    std::string family = "poisson";
    std::optional<double> alpha;
    std::string data;
    std::string truth;  // optional sidecar path
    double scale = 1.0;
    std::string init = "moments";
    bool strict = false;
};

int cmd_fit(const FitArgs& a) {
    if (a.method != "gva" && a.method != "gvacl")
        throw UsageError("--method must be gva or gvacl");
    if (a.init != "moments" && a.init != "zeros")
        throw UsageError("--init must be moments or zeros");
    if (!(a.scale > 0.0)) throw UsageError("--scale must be positive");
    const Family family = parse_family(a.family, a.alpha);

    gvacl::Dataset data = gvacl::read_csv_file(a.data, family);
    if (a.scale != 1.0) {
        for (double& y : data.y) y /= a.scale;
        for (double& x : data.x) x /= a.scale;
        data.validate();
    }

    gvacl::FitConfig cfg;
    cfg.method = a.method == "gva" ? Method::FullGva : Method::Gvacl;
    cfg.init = a.init == "zeros" ? gvacl::InitStrategy::Zeros
                                 : gvacl::InitStrategy::Moments;

    gvacl::FitResult r;
    try {
        r = family.tag == FamilyTag::LogisticExperimental
                ? gvacl::fit_logistic_experimental(data, cfg)
                : gvacl::fit(data, cfg);
    } catch (const gvacl::OverflowError& e) {
        std::cerr << "fit diverged: " << e.what() << "\n";
        return kExitNoConverge;
    } catch (const gvacl::FitError& e) {
        std::cerr << "fit failed: " << e.what() << "\n";
        return kExitNoConverge;
    }

    ordered_json j;
    j["method"] = a.method;
    j["family"] = family.name();
    j["scale"] = a.scale;

    ordered_json est;
    est["beta0"] = r.estimates.beta[0];
    for (size_t k = 1; k < r.estimates.beta.size(); ++k)
        est["beta" + std::to_string(k)] = r.estimates.beta[k];
    est["sigma_u"] = std::sqrt(r.estimates.sigma2_u);
    est["sigma_v"] = std::sqrt(r.estimates.sigma2_v);
    j["estimates"] = est;

    ordered_json se;
    if (cfg.method == Method::Gvacl &&
        family.tag != FamilyTag::LogisticExperimental && r.converged) {
        // empirical covariate MGF; the plug-in slope formula needs it for
        // Poisson and ignores it for Gamma
        std::vector<double> xs;
        if (data.p > 0) {
            xs.reserve(data.y.size());
            for (size_t c = 0; c < data.y.size(); ++c)
                xs.push_back(data.x[c * data.p]);
        } else {
            xs.assign(1, 0.0);
        }
        const gvacl::AsymptoticSE s = gvacl::standard_errors(
            family, r.estimates, data.m, data.n,
            gvacl::MgfSpec::empirical(std::move(xs)));
        se["beta0"] = s.se_beta0;
        se["beta1"] =
            s.se_beta1 ? ordered_json(*s.se_beta1) : ordered_json(nullptr);
        se["sigma_u"] = s.se_sigma_u;
        se["sigma_v"] = s.se_sigma_v;
    } else {
        // plug-in formulas cover the composite estimator only
        se["beta0"] = nullptr;
        se["beta1"] = nullptr;
        se["sigma_u"] = nullptr;
        se["sigma_v"] = nullptr;
    }
    j["se"] = se;

    if (!a.truth.empty()) {
        std::ifstream tf(a.truth);
        if (!tf) throw gvacl::DataError("cannot read " + a.truth);
        ordered_json truth;
        try {
            tf >> truth;
        } catch (const nlohmann::json::exception& e) {
            throw gvacl::DataError(a.truth + ": " + e.what());
        }
        ordered_json delta;
        delta["beta0"] = r.estimates.beta[0] - truth.at("beta0").get<double>();
        if (r.estimates.beta.size() > 1 && truth.contains("beta1"))
            delta["beta1"] =
                r.estimates.beta[1] - truth.at("beta1").get<double>();
        delta["sigma_u"] = std::sqrt(r.estimates.sigma2_u) -
                           truth.at("sigma_u").get<double>();
        delta["sigma_v"] = std::sqrt(r.estimates.sigma2_v) -
                           truth.at("sigma_v").get<double>();
        j["truth_delta"] = delta;
    }

    ordered_json diag;
    diag["iters"] = r.iters;
    diag["converged"] = r.converged;
    diag["elbo_final"] = r.elbo_trace.empty() ? ordered_json(nullptr)
                                              : ordered_json(r.elbo_trace.back());
    diag["wall_time_s"] = r.wall_time_s;
    diag["boundary"] = r.boundary;
    diag["init_fallback"] = r.init_fallback;
    if (r.experimental_correction) diag["experimental_correction"] = true;
    j["diagnostics"] = diag;

    std::cout << j.dump(2) << "\n";
    if (a.strict && !r.converged) {
        std::cerr << "fit did not converge within the iteration budget\n";
        return kExitNoConverge;
    }
    return 0;
}

// --- bench ------------------------------------------------------------------

struct BenchArgs {
    std::string family = "poisson";
    std::optional<double> alpha;
    int m = 50, n = 50;
    int reps = 100;
    std::uint64_t seed = 0;
    std::string methods = "gva,gvacl";
    int jobs = 1;
    double beta0 = -2.0, beta1 = -2.0;
    double sigma_u = 0.5, sigma_v = 0.5;
    std::string json_out;
};

int cmd_bench(const BenchArgs& a) {
    gvacl::BenchConfig cfg;
    cfg.sim.family = parse_family(a.family, a.alpha);
    if (cfg.sim.family.tag == FamilyTag::LogisticExperimental)
        throw UsageError("bench supports poisson and gamma only");
    cfg.sim.m = a.m;
    cfg.sim.n = a.n;
    cfg.sim.beta = {a.beta0, a.beta1};
    cfg.sim.sigma_u = a.sigma_u;
    cfg.sim.sigma_v = a.sigma_v;
    cfg.sim.covariate_law = gvacl::CovariateLaw::normal(1.0, 1.0);
    cfg.sim.seed = a.seed;
    cfg.methods = parse_methods(a.methods);
    cfg.reps = a.reps;
    cfg.jobs = a.jobs;

    const gvacl::BenchReport report = gvacl::run_bench(cfg);
    std::cout << report.render_table();
    if (!a.json_out.empty()) {
        std::ofstream jf(a.json_out);
        if (!jf) throw gvacl::DataError("cannot write " + a.json_out);
        jf << report.to_json() << "\n";
        std::cerr << "wrote " << a.json_out << "\n";
    } else {
        std::cout << report.to_json() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian variational estimation for crossed random effects"};
    app.require_subcommand(1);

    SimulateArgs sa;
    CLI::App* sim = app.add_subcommand(
        "simulate", "Draw a dataset and write CSV plus a truth sidecar");
    sim->add_option("--family", sa.family, "poisson, gamma or logistic");
    sim->add_option("--m", sa.m, "rows")->check(CLI::PositiveNumber);
    sim->add_option("--n", sa.n, "columns")->check(CLI::PositiveNumber);
    sim->add_option("--beta0", sa.beta0, "true intercept");
    sim->add_option("--beta1", sa.beta1, "true slope");
    sim->add_option("--sigma-u", sa.sigma_u, "row effect SD")
        ->check(CLI::NonNegativeNumber);
    sim->add_option("--sigma-v", sa.sigma_v, "column effect SD")
        ->check(CLI::NonNegativeNumber);
    double sim_alpha = 0.0;
    CLI::Option* sim_alpha_opt =
        sim->add_option("--alpha", sim_alpha, "Gamma shape (gamma family only)")
            ->check(CLI::PositiveNumber);
    sim->add_option("--seed", sa.seed, "RNG seed");
    sim->add_option("--out", sa.out, "output CSV path")->required();

    FitArgs fa;
    CLI::App* fit = app.add_subcommand("fit", "Fit one dataset, emit JSON");
    fit->add_option("--method", fa.method, "gva or gvacl");
    fit->add_option("--family", fa.family, "poisson, gamma or logistic");
    double fit_alpha = 0.0;
    CLI::Option* fit_alpha_opt =
        fit->add_option("--alpha", fit_alpha, "Gamma shape (gamma family only)")
            ->check(CLI::PositiveNumber);
    fit->add_option("--data", fa.data, "input CSV path")->required();
    fit->add_option("--truth", fa.truth,
                    "truth sidecar JSON; adds truth-vs-estimate deltas");
    fit->add_option("--scale", fa.scale,
                    "divide y and x by this before fitting");
    fit->add_option("--init", fa.init, "moments or zeros");
    fit->add_flag("--strict", fa.strict,
                  "exit 4 when the fit does not converge");

    BenchArgs ba;
    CLI::App* bench = app.add_subcommand(
        "bench", "Replicated simulate+fit study with a summary table");
    bench->add_option("--family", ba.family, "poisson or gamma");
    double bench_alpha = 0.0;
    CLI::Option* bench_alpha_opt =
        bench->add_option("--alpha", bench_alpha,
                          "Gamma shape (gamma family only)")
            ->check(CLI::PositiveNumber);
    bench->add_option("--m", ba.m, "rows")->check(CLI::PositiveNumber);
    bench->add_option("--n", ba.n, "columns")->check(CLI::PositiveNumber);
    bench->add_option("--reps", ba.reps, "replicates")
        ->check(CLI::PositiveNumber);
    bench->add_option("--seed", ba.seed, "base RNG seed");
    bench->add_option("--methods", ba.methods, "comma list of gva,gvacl");
    bench->add_option("--jobs", ba.jobs, "worker threads")
        ->check(CLI::PositiveNumber);
    bench->add_option("--beta0", ba.beta0, "true intercept");
    bench->add_option("--beta1", ba.beta1, "true slope");
    bench->add_option("--sigma-u", ba.sigma_u, "row effect SD")
        ->check(CLI::NonNegativeNumber);
    bench->add_option("--sigma-v", ba.sigma_v, "column effect SD")
        ->check(CLI::NonNegativeNumber);
    bench->add_option("--json", ba.json_out,
                      "write the report JSON here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }
    if (sim_alpha_opt->count() > 0) sa.alpha = sim_alpha;
    if (fit_alpha_opt->count() > 0) fa.alpha = fit_alpha;
    if (bench_alpha_opt->count() > 0) ba.alpha = bench_alpha;

    try {
        if (sim->parsed()) return cmd_simulate(sa);
        if (fit->parsed()) return cmd_fit(fa);
        return cmd_bench(ba);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const gvacl::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
