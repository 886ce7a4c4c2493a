#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treecover/numeric.hpp"

namespace treecover {

// Centering schedule for depth n: the extremal centering m_n, the two phase
// times, the square-root cover centering and the linear (real-clock)
// centering/scale.
struct CenteringSchedule {
    int n = 0;
    double m_n = 0.0;            // sqrt(log 2) n - 3/(4 sqrt(log 2)) log n
    double time_a = 0.0;         // m_n^2
    double time_b = 0.0;         // (n log n) / 2
    double sqrt_time_cover = 0.0;  // sqrt(log 2) n - 1/(2 sqrt(log 2)) log n
    double linear_center = 0.0;  // (log 2) n - log n
    double linear_scale = 0.0;   // 2^{n+1} n
};

CenteringSchedule centering(int n);

struct KsResult {
    double statistic = 0.0;
    double p = 1.0;
};

// Two-sample Kolmogorov-Smirnov with the asymptotic p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

struct GofResult {
    double chi2 = 0.0;
    double p = 1.0;
    int dof = 0;
    bool skipped = false;  // degenerate input
};

// Chi-square GOF of integer counts against Poisson(rate), tail bins pooled so
// every expected count is at least 5.
GofResult poisson_gof(std::span<const std::uint64_t> counts, double rate);

// Same against Binomial(m, q).
GofResult binomial_gof(std::span<const std::uint64_t> counts, int m, double q);

// Sample variance / mean.
double dispersion(std::span<const std::uint64_t> counts);

// Percentile bootstrap CI for the dispersion index.
struct BootstrapCi {
    double lo = 0.0;
    double hi = 0.0;
};
BootstrapCi dispersion_bootstrap_ci(std::span<const std::uint64_t> counts, double level,
                                    int resamples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Experiment reports

struct StatRecord {
    std::string name;
    std::vector<double> samples;  // per replica, in replica order
    bool dump_samples = true;     // include in CSV output
};

struct TestRecord {
    std::string name;
    double statistic = 0.0;
    std::optional<double> p;  // present for p-valued tests (Holm applies)
    bool pass = false;
    std::string note;  // e.g. "calibrated, not paper-derived"
};

struct ExperimentReport {
    std::string name;
    std::map<std::string, std::string> params;  // echoed effective configuration
    std::uint64_t master_seed = 0;
    double holm_alpha = 0.01;
    std::vector<StatRecord> stats;
    std::vector<TestRecord> tests;
    double runtime_seconds = 0.0;  // not serialized by default (reports are byte-reproducible)

    bool all_pass() const;
    // Marks p-valued tests as failed when Holm rejects at holm_alpha; direct
    // (non-p) tests keep their pass flags.
    void apply_holm();

    void add_param(const std::string& key, const std::string& value) { params[key] = value; }
    void add_param(const std::string& key, double value);
    void add_param(const std::string& key, std::uint64_t value) { params[key] = std::to_string(value); }
    void add_param(const std::string& key, int value) { params[key] = std::to_string(value); }
};

std::string to_json(const ExperimentReport& report, bool include_runtime = false);
std::string to_csv(const ExperimentReport& report);

// Writes <out_dir>/<name>.json and/or .csv; returns the written paths.
std::vector<std::string> emit(const ExperimentReport& report, const std::string& out_dir,
                              const std::string& format, bool include_runtime = false);

}  // namespace treecover
