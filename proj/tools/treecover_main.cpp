#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "treecover/experiments.hpp"
#include "treecover/parallel.hpp"

namespace {

using treecover::ExperimentReport;
using treecover::RunOptions;

struct CliConfig {
    std::string experiment;
    std::string config_path;
    std::string out_dir = "reports";
    std::string format = "json";
    std::string scale = "quick";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    bool timings = false;
    // Common numeric knobs; -1 / NaN means "use the experiment default".
    int n = -1;
    int k = -1;
    double s = std::nan("");
    double t = std::nan("");
    double u = std::nan("");
    double eta = std::nan("");
    int replicas = -1;
    int depth = -1;
    int samples = -1;
};

std::uint64_t default_seed() {
    if (const char* env = std::getenv("TREECOVER_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            std::cerr << "warning: ignoring malformed TREECOVER_SEED\n";
        }
    }
    return 1;
}

// Flat JSON config file; CLI flags override file values.
void load_config_file(CliConfig& cli) {
    if (cli.config_path.empty()) return;
    std::ifstream f(cli.config_path);
    if (!f) throw std::runtime_error("cannot open config file " + cli.config_path);
    nlohmann::json j;
    f >> j;
    auto set_int = [&](const char* key, int& slot) {
        if (j.contains(key) && slot < 0) slot = j[key].get<int>();
    };
    auto set_double = [&](const char* key, double& slot) {
        if (j.contains(key) && std::isnan(slot)) slot = j[key].get<double>();
    };
    set_int("n", cli.n);
    set_int("k", cli.k);
    set_int("replicas", cli.replicas);
    set_int("depth", cli.depth);
    set_int("samples", cli.samples);
    set_double("s", cli.s);
    set_double("t", cli.t);
    set_double("u", cli.u);
    set_double("eta", cli.eta);
    if (j.contains("seed") && !cli.seed_set) {
        cli.seed = j["seed"].get<std::uint64_t>();
        cli.seed_set = true;
    }
    if (j.contains("workers") && cli.workers == 0) cli.workers = j["workers"].get<int>();
    if (j.contains("scale") && cli.scale == "quick") cli.scale = j["scale"].get<std::string>();
}

int run_experiment(const CliConfig& cli) {
    RunOptions opt;
    opt.seed = cli.seed;
    opt.workers = cli.workers > 0 ? cli.workers : treecover::default_workers();

    std::vector<ExperimentReport> reports;
    const auto started = std::chrono::steady_clock::now();

    if (cli.experiment == "cover") {
        treecover::CoverConfig cfg;
        if (cli.n > 0) cfg.n_list = {cli.n};
        if (cli.replicas > 0) cfg.replicas = cli.replicas;
        reports.push_back(cover_experiment(cfg, opt));
    } else if (cli.experiment == "phase-ab") {
        treecover::PhaseAbConfig cfg;
        if (!std::isnan(cli.eta)) cfg.eta = cli.eta;
        if (cli.n > 0) cfg.planted_n = cli.n;
        if (cli.replicas > 0) {
            cfg.overdisp_replicas = cli.replicas;
            cfg.planted_replicas = {cli.replicas, cli.replicas / 2};
        }
        if (!std::isnan(cli.u)) cfg.overdisp_u = cli.u;
        reports.push_back(phase_ab_experiment(cfg, opt));
    } else if (cli.experiment == "iso-test") {
        const int n = cli.n > 0 ? cli.n : 2;
        const double t = std::isnan(cli.t) ? 1.0 : cli.t;
        const int samples = cli.samples > 0 ? cli.samples : 100000;
        reports.push_back(treecover::iso_grid_experiment({n}, {t}, samples, opt));
    } else if (cli.experiment == "moments") {
        reports.push_back(treecover::moments_experiment(cli.n > 0 ? cli.n : 6,
                                                        std::isnan(cli.t) ? 10.0 : cli.t,
                                                        cli.replicas > 0 ? cli.replicas : 20000, opt));
    } else if (cli.experiment == "hitting") {
        reports.push_back(treecover::hitting_experiment(10, cli.n > 0 ? cli.n : 8,
                                                        cli.replicas > 0 ? cli.replicas : 200000, opt));
    } else if (cli.experiment == "bessel") {
        treecover::BesselConfig cfg;
        if (cli.n > 0) cfg.n = cli.n;
        if (cli.k > 0) cfg.k = cli.k;
        if (!std::isnan(cli.t)) cfg.t = cli.t;
        if (cli.replicas > 0) cfg.replicas = cli.replicas;
        reports.push_back(bessel_experiment(cfg, opt));
    } else if (cli.experiment == "martingale") {
        treecover::MartingaleConfig cfg;
        if (cli.depth > 0) cfg.ks_depth = cli.depth;
        if (cli.samples > 0) cfg.ks_samples = cli.samples;
        reports.push_back(martingale_experiment(cfg, opt));
    } else if (cli.experiment == "negcorr") {
        reports.push_back(treecover::negcorr_experiment(cli.depth > 0 ? cli.depth : 8, 8,
                                                        cli.samples > 0 ? cli.samples : 100000, opt));
    } else if (cli.experiment == "zlambda") {
        reports.push_back(treecover::zlambda_experiment(cli.depth > 0 ? cli.depth : 16,
                                                        cli.samples > 0 ? cli.samples : 10000, opt));
    } else if (cli.experiment == "tau-clt") {
        treecover::TauCltConfig cfg;
        if (cli.n > 0) cfg.n = cli.n;
        if (cli.k > 0) cfg.k = cli.k;
        if (!std::isnan(cli.s)) cfg.s = cli.s;
        if (cli.replicas > 0) cfg.replicas = cli.replicas;
        reports.push_back(tau_clt_experiment(cfg, opt));
    } else if (cli.experiment == "rhat") {
        treecover::RhatConfig cfg;
        if (cli.n > 0) cfg.n = cli.n;
        if (cli.k > 0) cfg.k = cli.k;
        if (!std::isnan(cli.s)) cfg.s = cli.s;
        if (cli.replicas > 0) cfg.replicas = cli.replicas;
        reports.push_back(rhat_experiment(cfg, opt));
    } else if (cli.experiment == "full-suite") {
        const auto scale =
            cli.scale == "desk" ? treecover::SuiteScale::Desk : treecover::SuiteScale::Quick;
        treecover::SuiteResult suite = full_suite(scale, opt);
        reports = std::move(suite.reports);
    } else {
        std::cerr << "unknown experiment: " << cli.experiment << "\n";
        return 2;
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    bool all_pass = true;
    for (auto& report : reports) {
        report.runtime_seconds = elapsed;
        const auto files = emit(report, cli.out_dir, cli.format, cli.timings);
        for (const auto& f : files) std::cout << "wrote " << f << "\n";
        for (const auto& t : report.tests)
            std::cout << (t.pass ? "  [pass] " : "  [FAIL] ") << report.name << "/" << t.name
                      << " statistic=" << t.statistic << (t.p ? " p=" + std::to_string(*t.p) : "")
                      << "\n";
        all_pass = all_pass && report.all_pass();
    }
    if (cli.timings) std::cout << "elapsed_seconds " << elapsed << "\n";
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"treecover: stochastic verification experiments for tree walks and fields"};
    app.require_subcommand(0);

    CliConfig cli;
    cli.seed = default_seed();
    app.add_option("experiment", cli.experiment,
                   "one of: cover phase-ab iso-test moments hitting bessel martingale negcorr "
                   "zlambda tau-clt rhat full-suite")
        ->required();
    app.add_option("--config", cli.config_path, "JSON config file (flat parameter map)");
    app.add_option("--n", cli.n, "tree depth");
    app.add_option("--k", cli.k, "intermediate depth k");
    app.add_option("--s", cli.s, "time/offset parameter s");
    app.add_option("--t", cli.t, "root-clock time t");
    app.add_option("--u", cli.u, "sub-level threshold u");
    app.add_option("--eta", cli.eta, "cluster-scale exponent eta");
    app.add_option("--replicas", cli.replicas, "Monte-Carlo replicas");
    app.add_option("--depth", cli.depth, "field truncation depth");
    app.add_option("--samples", cli.samples, "field samples");
    auto* seed_opt = app.add_option("--seed", cli.seed, "master seed (also TREECOVER_SEED)");
    app.add_option("--workers", cli.workers, "worker threads (default: hardware)");
    app.add_option("--out", cli.out_dir, "output directory");
    app.add_option("--format", cli.format, "json|csv|both")
        ->check(CLI::IsMember({"json", "csv", "both"}));
    app.add_option("--scale", cli.scale, "full-suite scale: quick|desk")
        ->check(CLI::IsMember({"quick", "desk"}));
    app.add_flag("--timings", cli.timings, "include wall time in output (breaks byte-reproducibility)");

    try {
        app.parse(argc, argv);
        cli.seed_set = seed_opt->count() > 0;
        load_config_file(cli);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        return run_experiment(cli);
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    }
}
