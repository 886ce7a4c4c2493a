#include "treecover/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "treecover/rng.hpp"

namespace treecover {

CenteringSchedule centering(int n) {
    if (n < 2) throw std::invalid_argument("centering needs n >= 2");
    const double log2 = std::log(2.0);
    const double sl2 = std::sqrt(log2);
    const double logn = std::log(static_cast<double>(n));
    CenteringSchedule c;
    c.n = n;
    c.m_n = sl2 * n - 3.0 / (4.0 * sl2) * logn;
    c.time_a = c.m_n * c.m_n;
    c.time_b = 0.5 * n * logn;
    c.sqrt_time_cover = sl2 * n - 1.0 / (2.0 * sl2) * logn;
    c.linear_center = log2 * n - logn;
    c.linear_scale = std::ldexp(static_cast<double>(n), n + 1);
    return c;
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::vector<double> xs(a.begin(), a.end());
    std::vector<double> ys(b.begin(), b.end());
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    const double na = static_cast<double>(xs.size());
    const double nb = static_cast<double>(ys.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < xs.size() && j < ys.size()) {
        const double x = std::min(xs[i], ys[j]);
        while (i < xs.size() && xs[i] <= x) ++i;
        while (j < ys.size() && ys[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    const double lambda = (ne + 0.12 + 0.11 / ne) * d;
    return {d, kolmogorov_sf(lambda)};
}

namespace {

GofResult pooled_gof(const std::vector<double>& expected, const std::vector<double>& observed,
                     int estimated_params) {
    // Pool adjacent cells until every expected count is >= 5.
    std::vector<double> e, o;
    double ec = 0.0, oc = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        ec += expected[i];
        oc += observed[i];
        if (ec >= 5.0) {
            e.push_back(ec);
            o.push_back(oc);
            ec = oc = 0.0;
        }
    }
    if (ec > 0.0 || oc > 0.0) {
        if (!e.empty()) {
            e.back() += ec;
            o.back() += oc;
        } else {
            e.push_back(ec);
            o.push_back(oc);
        }
    }
    GofResult r;
    r.dof = static_cast<int>(e.size()) - 1 - estimated_params;
    if (r.dof < 1) {
        r.skipped = true;
        return r;
    }
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double diff = o[i] - e[i];
        r.chi2 += diff * diff / e[i];
    }
    r.p = chi2_sf(r.chi2, r.dof);
    return r;
}

}  // namespace

GofResult poisson_gof(std::span<const std::uint64_t> counts, double rate) {
    if (counts.empty() || rate <= 0.0) throw std::invalid_argument("poisson_gof: bad input");
    std::uint64_t max_count = 0;
    bool all_equal = true;
    for (auto c : counts) {
        max_count = std::max(max_count, c);
        if (c != counts[0]) all_equal = false;
    }
    if (all_equal) return {0.0, 1.0, 0, true};
    const double total = static_cast<double>(counts.size());
    std::vector<double> observed(max_count + 2, 0.0);
    for (auto c : counts) observed[c] += 1.0;
    std::vector<double> expected(max_count + 2, 0.0);
    double pmf = std::exp(-rate);
    double tail = 1.0;
    for (std::uint64_t k = 0; k <= max_count; ++k) {
        expected[k] = total * pmf;
        tail -= pmf;
        pmf *= rate / static_cast<double>(k + 1);
    }
    expected[max_count + 1] = total * std::max(tail, 0.0);
    return pooled_gof(expected, observed, 0);
}

GofResult binomial_gof(std::span<const std::uint64_t> counts, int m, double q) {
    if (counts.empty() || m < 1 || q <= 0.0 || q >= 1.0)
        throw std::invalid_argument("binomial_gof: bad input");
    bool all_equal = true;
    for (auto c : counts)
        if (c != counts[0]) all_equal = false;
    if (all_equal) return {0.0, 1.0, 0, true};
    const double total = static_cast<double>(counts.size());
    std::vector<double> observed(m + 1, 0.0);
    for (auto c : counts) observed[std::min<std::uint64_t>(c, m)] += 1.0;
    std::vector<double> expected(m + 1, 0.0);
    double pmf = std::pow(1.0 - q, m);
    for (int k = 0; k <= m; ++k) {
        expected[k] = total * pmf;
        pmf *= q / (1.0 - q) * static_cast<double>(m - k) / static_cast<double>(k + 1);
    }
    return pooled_gof(expected, observed, 0);
}

double dispersion(std::span<const std::uint64_t> counts) {
    if (counts.empty()) throw std::invalid_argument("dispersion: empty");
    std::vector<double> xs(counts.begin(), counts.end());
    const Summary s = summarize(xs);
    if (s.mean == 0.0) return 0.0;
    return s.variance / s.mean;
}

BootstrapCi dispersion_bootstrap_ci(std::span<const std::uint64_t> counts, double level,
                                    int resamples, std::uint64_t seed) {
    rng::Philox gen(seed, rng::stream_id(0x626f6f74ull, 0, rng::Lane::Bootstrap));
    const std::size_t n = counts.size();
    std::vector<double> values(resamples);
    std::vector<std::uint64_t> draw(n);
    for (int r = 0; r < resamples; ++r) {
        for (std::size_t i = 0; i < n; ++i) draw[i] = counts[gen.below(static_cast<std::uint32_t>(n))];
        values[r] = dispersion(draw);
    }
    const double tail = (1.0 - level) / 2.0;
    return {quantile(values, tail), quantile(values, 1.0 - tail)};
}

bool ExperimentReport::all_pass() const {
    for (const auto& t : tests)
        if (!t.pass) return false;
    return true;
}

void ExperimentReport::apply_holm() {
    std::vector<std::size_t> idx;
    std::vector<double> ps;
    for (std::size_t i = 0; i < tests.size(); ++i) {
        if (tests[i].p) {
            idx.push_back(i);
            ps.push_back(*tests[i].p);
        }
    }
    if (ps.empty()) return;
    // A p-valued test passes iff Holm does not reject it at the family level.
    const auto reject = holm_reject(ps, holm_alpha);
    for (std::size_t j = 0; j < idx.size(); ++j) tests[idx[j]].pass = !reject[j];
}

void ExperimentReport::add_param(const std::string& key, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    params[key] = buf;
}

std::string to_json(const ExperimentReport& report, bool include_runtime) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["name"] = report.name;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [k, v] : report.params) params[k] = v;
    j["params"] = params;
    j["seeds"] = {{"master", report.master_seed}};
    j["holm_alpha"] = report.holm_alpha;
    nlohmann::ordered_json stats = nlohmann::ordered_json::array();
    for (const auto& s : report.stats) {
        const Summary sum = summarize(s.samples);
        nlohmann::ordered_json entry;
        entry["name"] = s.name;
        entry["n"] = sum.n;
        entry["mean"] = sum.mean;
        entry["sd"] = sum.sd;
        entry["min"] = sum.min;
        entry["max"] = sum.max;
        stats.push_back(entry);
    }
    j["stats"] = stats;
    nlohmann::ordered_json tests = nlohmann::ordered_json::array();
    for (const auto& t : report.tests) {
        nlohmann::ordered_json entry;
        entry["name"] = t.name;
        entry["statistic"] = t.statistic;
        if (t.p) entry["p"] = *t.p;
        entry["pass"] = t.pass;
        if (!t.note.empty()) entry["note"] = t.note;
        tests.push_back(entry);
    }
    j["tests"] = tests;
    j["pass"] = report.all_pass();
    if (include_runtime) j["runtime_seconds"] = report.runtime_seconds;
    return j.dump(2);
}

std::string to_csv(const ExperimentReport& report) {
    std::string out = "replica_id,statistic,value\n";
    char buf[96];
    for (const auto& s : report.stats) {
        if (!s.dump_samples) continue;
        for (std::size_t i = 0; i < s.samples.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%zu,%s,%.17g\n", i, s.name.c_str(), s.samples[i]);
            out += buf;
        }
    }
    return out;
}

std::vector<std::string> emit(const ExperimentReport& report, const std::string& out_dir,
                              const std::string& format, bool include_runtime) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> written;
    auto write_file = [&](const std::string& path, const std::string& content) {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + path);
        f << content;
        written.push_back(path);
    };
    if (format == "json" || format == "both")
        write_file(out_dir + "/" + report.name + ".json", to_json(report, include_runtime));
    if (format == "csv" || format == "both")
        write_file(out_dir + "/" + report.name + ".csv", to_csv(report));
    return written;
}

}  // namespace treecover
