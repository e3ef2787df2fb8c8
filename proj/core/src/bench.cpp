#include "gvacl/bench.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace gvacl {

namespace {

using ordered_json = nlohmann::ordered_json;

const char* method_name(Method m) {
    return m == Method::FullGva ? "gva" : "gvacl";
}

MgfSpec mgf_for(const SimSpec& sim) {
    if (sim.covariate_law.kind == CovariateLaw::Kind::Normal)
        return MgfSpec::normal(sim.covariate_law.mean, sim.covariate_law.sd);
    return MgfSpec::empirical(sim.covariate_law.values);
}

Replicate run_one(const BenchConfig& cfg, Method method, int index) {
    SimSpec spec = cfg.sim;
    spec.seed = replicate_seed(cfg.sim.seed, static_cast<std::uint64_t>(index));
    Simulation sim = simulate(spec);

    Replicate rep;
    rep.index = index;
    FitConfig fc = cfg.fit;
    fc.method = method;
    try {
        FitResult r = fit(sim.data, fc);
        rep.converged = r.converged;
        rep.wall_time_s = r.wall_time_s;
        rep.beta0 = r.estimates.beta[0];
        rep.beta1 = r.estimates.beta.size() > 1 ? r.estimates.beta[1] : 0.0;
        rep.sigma_u = std::sqrt(r.estimates.sigma2_u);
        rep.sigma_v = std::sqrt(r.estimates.sigma2_v);
        if (method == Method::Gvacl && r.converged)
            rep.se = standard_errors(sim.data.family, r.estimates, sim.data.m,
                                     sim.data.n, mgf_for(cfg.sim));
    } catch (const std::exception&) {
        rep.converged = false;
    }
    return rep;
}

ParamStats stats_over(const std::vector<Replicate>& reps,
                      double Replicate::*field,
                      const std::function<std::optional<double>(const Replicate&)>& se_of) {
    ParamStats s;
    int used = 0;
    double mean = 0.0;
    for (const auto& r : reps)
        if (r.converged) {
            mean += r.*field;
            ++used;
        }
    if (used == 0) return s;
    mean /= used;
    s.mean = mean;
    if (used >= 2) {
        double acc = 0.0;
        for (const auto& r : reps)
            if (r.converged) acc += (r.*field - mean) * (r.*field - mean);
        s.sd = std::sqrt(acc / (used - 1));
    }
    double se_sum = 0.0;
    int se_n = 0;
    for (const auto& r : reps) {
        if (!r.converged) continue;
        if (auto v = se_of(r)) {
            se_sum += *v;
            ++se_n;
        }
    }
    if (se_n > 0) s.mese = se_sum / se_n;
    return s;
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(prec);
    os << v;
    return os.str();
}

std::string mean_sd(const ParamStats& s) {
    std::string out = fmt(s.mean, 2);
    out += s.sd ? "(" + fmt(*s.sd, 2) + ")" : "(NA)";
    return out;
}

}  // namespace

BenchReport run_bench(const BenchConfig& config) {
    BenchReport report;
    report.config = config;
    for (Method method : config.methods) {
        std::vector<Replicate> reps(config.reps);
        const int jobs = std::max(1, config.jobs);
        std::atomic<int> next{0};
        auto worker = [&] {
            for (;;) {
                const int idx = next.fetch_add(1);
                if (idx >= config.reps) return;
                reps[idx] = run_one(config, method, idx);
            }
        };
        if (jobs == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }

        MethodReport mr;
        mr.method = method;
        mr.beta0 = stats_over(reps, &Replicate::beta0, [](const Replicate& r) {
            return r.se ? std::optional<double>(r.se->se_beta0) : std::nullopt;
        });
        mr.beta1 = stats_over(reps, &Replicate::beta1, [](const Replicate& r) {
            return r.se ? r.se->se_beta1 : std::nullopt;
        });
        mr.sigma_u = stats_over(reps, &Replicate::sigma_u, [](const Replicate& r) {
            return r.se ? std::optional<double>(r.se->se_sigma_u) : std::nullopt;
        });
        mr.sigma_v = stats_over(reps, &Replicate::sigma_v, [](const Replicate& r) {
            return r.se ? std::optional<double>(r.se->se_sigma_v) : std::nullopt;
        });
        double time_acc = 0.0;
        for (const auto& r : reps) {
            if (r.converged) {
                time_acc += r.wall_time_s;
                ++mr.reps_used;
            } else {
                ++mr.failures;
            }
        }
        mr.mean_time_s = mr.reps_used > 0 ? time_acc / mr.reps_used : 0.0;
        mr.replicates = std::move(reps);
        report.methods.push_back(std::move(mr));
    }
    return report;
}

std::string BenchReport::to_json() const {
    ordered_json j;
    j["family"] = config.sim.family.name();
    j["m"] = config.sim.m;
    j["n"] = config.sim.n;
    j["reps"] = config.reps;
    j["seed"] = config.sim.seed;
    ordered_json truth;
    truth["beta"] = config.sim.beta;
    truth["sigma_u"] = config.sim.sigma_u;
    truth["sigma_v"] = config.sim.sigma_v;
    if (config.sim.family.tag == FamilyTag::Gamma)
        truth["alpha"] = config.sim.family.shape;
    j["truth"] = truth;
    ordered_json out_methods = ordered_json::object();
    for (const auto& mr : methods) {
        ordered_json mj;
        auto put = [](ordered_json& out, const char* key, const ParamStats& s) {
            ordered_json pj;
            pj["mean"] = s.mean;
            pj["sd"] = s.sd ? ordered_json(*s.sd) : ordered_json(nullptr);
            pj["mese"] = s.mese ? ordered_json(*s.mese) : ordered_json(nullptr);
            out[key] = pj;
        };
        put(mj, "beta0", mr.beta0);
        put(mj, "beta1", mr.beta1);
        put(mj, "sigma_u", mr.sigma_u);
        put(mj, "sigma_v", mr.sigma_v);
        mj["mean_time_s"] = mr.mean_time_s;
        mj["failures"] = mr.failures;
        mj["reps_used"] = mr.reps_used;
        out_methods[method_name(mr.method)] = mj;
    }
    j["methods"] = out_methods;
    return j.dump(2);
}

std::string BenchReport::render_table() const {
    std::ostringstream os;
    os << config.sim.family.name() << "  (m,n)=(" << config.sim.m << ","
       << config.sim.n << ")  reps=" << config.reps << "\n";
    os << "                ";
    for (const auto& mr : methods) os << method_name(mr.method) << "\t\t";
    os << "\n";
    auto row = [&](const char* label, ParamStats MethodReport::*field) {
        os << label << " Mean(SD)\t";
        for (const auto& mr : methods) os << mean_sd(mr.*field) << "\t";
        os << "\n" << label << " MESE    \t";
        for (const auto& mr : methods)
            os << ((mr.*field).mese ? fmt(*(mr.*field).mese, 2) : "NA") << "\t\t";
        os << "\n";
    };
    row("beta0  ", &MethodReport::beta0);
    row("beta1  ", &MethodReport::beta1);
    row("sigma_u", &MethodReport::sigma_u);
    row("sigma_v", &MethodReport::sigma_v);
    os << "Mean Time(s)\t";
    for (const auto& mr : methods) os << fmt(mr.mean_time_s, 3) << "\t\t";
    os << "\nfailures\t";
    for (const auto& mr : methods) os << mr.failures << "\t\t";
    os << "\n";
    return os.str();
}

}  // namespace gvacl
